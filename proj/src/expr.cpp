#include "thread5d/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace thread5d {

namespace {

enum class Tok : std::uint8_t {
  Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End
};

struct Token {
  Tok kind = Tok::End;
  double number = 0.0;
  std::string_view text;
  std::uint32_t begin = 0;
  std::uint32_t end = 0;
};

constexpr int kMaxDepth = 256;

struct FuncEntry {
  std::string_view name;
  FuncId id;
};

constexpr FuncEntry kFuncs[] = {
    {"sin", FuncId::Sin},   {"cos", FuncId::Cos},   {"tan", FuncId::Tan},
    {"exp", FuncId::Exp},   {"log", FuncId::Log},   {"sqrt", FuncId::Sqrt},
    {"sinh", FuncId::Sinh}, {"cosh", FuncId::Cosh}, {"tanh", FuncId::Tanh},
    {"abs", FuncId::Abs},
};

const char* func_name(FuncId f) {
  for (const auto& e : kFuncs)
    if (e.id == f) return e.name.data();
  return "?";
}

bool is_ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::string format17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

} // namespace

// ---------------------------------------------------------------------------
// Parser

class ExprParser {
 public:
  explicit ExprParser(std::string_view src) : src_(src) { advance(); }

  Expr run() {
    Expr e;
    e.source_.assign(src_.begin(), src_.end());
    out_ = &e;
    if (src_.empty() || cur_.kind == Tok::End)
      fail("expected an expression", cur_.begin);
    e.root_ = parse_expr(0);
    if (cur_.kind != Tok::End)
      fail("expected an operator ('+', '-', '*', '/', '^') or end of input", cur_.begin);
    out_ = nullptr;
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& expected, std::uint32_t at) {
    throw ParseError("syntax error at byte " + std::to_string(at) + ": " + expected,
                     at);
  }

  void advance() { cur_ = lex(); }

  Token lex() {
    while (pos_ < src_.size() &&
           (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' ||
            src_[pos_] == '\r'))
      ++pos_;
    Token t;
    t.begin = static_cast<std::uint32_t>(pos_);
    if (pos_ >= src_.size()) {
      t.kind = Tok::End;
      t.end = t.begin;
      return t;
    }
    const char c = src_[pos_];
    switch (c) {
      case '+': t.kind = Tok::Plus; break;
      case '-': t.kind = Tok::Minus; break;
      case '*': t.kind = Tok::Star; break;
      case '/': t.kind = Tok::Slash; break;
      case '^': t.kind = Tok::Caret; break;
      case '(': t.kind = Tok::LParen; break;
      case ')': t.kind = Tok::RParen; break;
      default:
        if (is_digit(c) || (c == '.' && pos_ + 1 < src_.size() && is_digit(src_[pos_ + 1]))) {
          const char* first = src_.data() + pos_;
          const char* last = src_.data() + src_.size();
          double value = 0.0;
          auto [ptr, ec] = std::from_chars(first, last, value);
          if (ec != std::errc{})
            fail("malformed numeric literal", t.begin);
          t.kind = Tok::Number;
          t.number = value;
          pos_ += static_cast<std::size_t>(ptr - first);
          t.end = static_cast<std::uint32_t>(pos_);
          return t;
        }
        if (is_ident_start(c)) {
          std::size_t j = pos_;
          while (j < src_.size() && is_ident_char(src_[j])) ++j;
          t.kind = Tok::Ident;
          t.text = src_.substr(pos_, j - pos_);
          pos_ = j;
          t.end = static_cast<std::uint32_t>(pos_);
          return t;
        }
        fail(std::string("unexpected character '") + c + "'", t.begin);
    }
    ++pos_;
    t.end = static_cast<std::uint32_t>(pos_);
    return t;
  }

  void check_depth(int depth) {
    if (depth > kMaxDepth)
      fail("expression nests too deeply", cur_.begin);
  }

  std::uint32_t parse_expr(int depth) {
    check_depth(depth);
    std::uint32_t lhs = parse_term(depth + 1);
    while (cur_.kind == Tok::Plus || cur_.kind == Tok::Minus) {
      const BinaryOp op = cur_.kind == Tok::Plus ? BinaryOp::Add : BinaryOp::Sub;
      advance();
      const std::uint32_t rhs = parse_term(depth + 1);
      lhs = push_binary(op, lhs, rhs);
    }
    return lhs;
  }

  std::uint32_t parse_term(int depth) {
    check_depth(depth);
    std::uint32_t lhs = parse_factor(depth + 1);
    while (cur_.kind == Tok::Star || cur_.kind == Tok::Slash) {
      const BinaryOp op = cur_.kind == Tok::Star ? BinaryOp::Mul : BinaryOp::Div;
      advance();
      const std::uint32_t rhs = parse_factor(depth + 1);
      lhs = push_binary(op, lhs, rhs);
    }
    return lhs;
  }

  std::uint32_t parse_factor(int depth) {
    check_depth(depth);
    if (cur_.kind == Tok::Minus) {
      const std::uint32_t begin = cur_.begin;
      advance();
      const std::uint32_t operand = parse_factor(depth + 1);
      ExprNode n;
      n.kind = ExprKind::Neg;
      n.lhs = operand;
      n.begin = begin;
      n.end = out_->nodes_[operand].end;
      return out_->add(n);
    }
    return parse_power(depth + 1);
  }

  std::uint32_t parse_power(int depth) {
    check_depth(depth);
    const std::uint32_t base = parse_atom(depth + 1);
    if (cur_.kind == Tok::Caret) {
      advance();
      // Right-associative, and the exponent may carry a unary minus: 2^-3.
      const std::uint32_t exponent = parse_factor(depth + 1);
      return push_binary(BinaryOp::Pow, base, exponent);
    }
    return base;
  }

  std::uint32_t parse_atom(int depth) {
    check_depth(depth);
    switch (cur_.kind) {
      case Tok::Number: {
        ExprNode n;
        n.kind = ExprKind::Number;
        n.number = cur_.number;
        n.begin = cur_.begin;
        n.end = cur_.end;
        advance();
        return out_->add(n);
      }
      case Tok::Ident:
        return parse_ident(depth);
      case Tok::LParen: {
        advance();
        const std::uint32_t inner = parse_expr(depth + 1);
        if (cur_.kind != Tok::RParen)
          fail("expected an operator ('+', '-', '*', '/', '^') or ')'", cur_.begin);
        advance();
        return inner;
      }
      default:
        fail("expected a number, an identifier, '-', or '('", cur_.begin);
    }
  }

  std::uint32_t parse_ident(int depth) {
    const Token tok = cur_;
    const std::string_view name = tok.text;

    if (name.size() == 2 && name[0] == 'x' && name[1] >= '0' && name[1] <= '4') {
      ExprNode n;
      n.kind = ExprKind::Variable;
      n.var = static_cast<std::uint8_t>(name[1] - '0');
      n.begin = tok.begin;
      n.end = tok.end;
      advance();
      return out_->add(n);
    }

    // Named constants fold to literals at parse time.
    if (name == "pi" || name == "e") {
      ExprNode n;
      n.kind = ExprKind::Number;
      n.number = name == "pi" ? 3.14159265358979323846 : 2.71828182845904523536;
      n.begin = tok.begin;
      n.end = tok.end;
      advance();
      return out_->add(n);
    }

    for (const auto& f : kFuncs) {
      if (name == f.name) {
        advance();
        if (cur_.kind != Tok::LParen)
          fail("expected '(' after function name '" + std::string(name) + "'",
               cur_.begin);
        advance();
        const std::uint32_t arg = parse_expr(depth + 1);
        if (cur_.kind != Tok::RParen)
          fail("expected an operator ('+', '-', '*', '/', '^') or ')'", cur_.begin);
        const std::uint32_t rparen_end = cur_.end;
        advance();
        ExprNode n;
        n.kind = ExprKind::Call;
        n.func = f.id;
        n.lhs = arg;
        n.begin = tok.begin;
        n.end = rparen_end;
        return out_->add(n);
      }
    }

    fail("unknown identifier '" + std::string(name) +
             "' (expected x0..x4, pi, e, or a function name)",
         tok.begin);
  }

  std::uint32_t push_binary(BinaryOp op, std::uint32_t lhs, std::uint32_t rhs) {
    ExprNode n;
    n.kind = ExprKind::Binary;
    n.bop = op;
    n.lhs = lhs;
    n.rhs = rhs;
    n.begin = out_->nodes_[lhs].begin;
    n.end = out_->nodes_[rhs].end;
    return out_->add(n);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  Token cur_;
  Expr* out_ = nullptr;
};

Expr Expr::parse(std::string_view source) { return ExprParser(source).run(); }

// ---------------------------------------------------------------------------
// Construction helpers

std::uint32_t Expr::add(ExprNode n) {
  nodes_.push_back(n);
  return static_cast<std::uint32_t>(nodes_.size() - 1);
}

std::uint32_t Expr::graft(const Expr& other) {
  const std::uint32_t base = static_cast<std::uint32_t>(nodes_.size());
  for (ExprNode n : other.nodes_) {
    if (n.kind == ExprKind::Neg || n.kind == ExprKind::Binary || n.kind == ExprKind::Call)
      n.lhs += base;
    if (n.kind == ExprKind::Binary) n.rhs += base;
    // Source spans are meaningless once trees from different sources mix.
    n.begin = n.end = 0;
    nodes_.push_back(n);
  }
  return base + other.root_;
}

Expr Expr::number(double value) {
  Expr e;
  ExprNode n;
  n.kind = ExprKind::Number;
  n.number = value;
  e.root_ = e.add(n);
  return e;
}

Expr Expr::variable(int axis) {
  Expr e;
  ExprNode n;
  n.kind = ExprKind::Variable;
  n.var = static_cast<std::uint8_t>(axis);
  e.root_ = e.add(n);
  return e;
}

Expr Expr::binary(BinaryOp op, const Expr& lhs, const Expr& rhs) {
  Expr e;
  const std::uint32_t l = e.graft(lhs);
  const std::uint32_t r = e.graft(rhs);
  ExprNode n;
  n.kind = ExprKind::Binary;
  n.bop = op;
  n.lhs = l;
  n.rhs = r;
  e.root_ = e.add(n);
  return e;
}

Expr Expr::call(FuncId f, const Expr& arg) {
  Expr e;
  const std::uint32_t a = e.graft(arg);
  ExprNode n;
  n.kind = ExprKind::Call;
  n.func = f;
  n.lhs = a;
  e.root_ = e.add(n);
  return e;
}

// ---------------------------------------------------------------------------
// Evaluation

Jet5 Expr::eval_jet(const Point5& p) const { return eval_node(root_, p); }

Jet5 Expr::eval_node(std::uint32_t idx, const Point5& p) const {
  const ExprNode& n = nodes_[idx];
  switch (n.kind) {
    case ExprKind::Number:
      return Jet5::constant(n.number);
    case ExprKind::Variable:
      return Jet5::variable(p[n.var], n.var);
    case ExprKind::Neg:
      return -eval_node(n.lhs, p);
    case ExprKind::Binary: {
      const Jet5 a = eval_node(n.lhs, p);
      const Jet5 b = eval_node(n.rhs, p);
      switch (n.bop) {
        case BinaryOp::Add: return a + b;
        case BinaryOp::Sub: return a - b;
        case BinaryOp::Mul: return a * b;
        case BinaryOp::Div:
          if (b.v == 0.0) domain_error(idx, "division by zero");
          return a / b;
        case BinaryOp::Pow: {
          const bool const_exp = b.d == std::array<double, 5>{};
          const double rounded = std::nearbyint(b.v);
          if (const_exp && b.v == rounded && std::fabs(b.v) <= 1e9) {
            const long long k = static_cast<long long>(rounded);
            if (a.v == 0.0 && k < 0)
              domain_error(idx, "zero raised to a negative power");
            return pow_int(a, k);
          }
          if (a.v <= 0.0)
            domain_error(idx, "non-integer power of a non-positive base");
          return pow_general(a, b);
        }
      }
      break;
    }
    case ExprKind::Call: {
      const Jet5 a = eval_node(n.lhs, p);
      switch (n.func) {
        case FuncId::Sin: return sin(a);
        case FuncId::Cos: return cos(a);
        case FuncId::Tan: return tan(a);
        case FuncId::Exp: return exp(a);
        case FuncId::Log:
          if (a.v <= 0.0) domain_error(idx, "logarithm of a non-positive value");
          return log(a);
        case FuncId::Sqrt:
          if (a.v < 0.0) domain_error(idx, "square root of a negative value");
          return sqrt(a);
        case FuncId::Sinh: return sinh(a);
        case FuncId::Cosh: return cosh(a);
        case FuncId::Tanh: return tanh(a);
        case FuncId::Abs: return abs(a);
      }
      break;
    }
  }
  throw Error("corrupt expression node");
}

void Expr::domain_error(std::uint32_t idx, const std::string& what) const {
  const ExprNode& n = nodes_[idx];
  const std::string sub = node_text(idx);
  std::string msg = what + " in '" + sub + "'";
  if (!source_.empty()) msg += " at byte " + std::to_string(n.begin);
  throw EvalDomainError(std::move(msg), sub, n.begin);
}

std::string Expr::node_text(std::uint32_t idx) const {
  const ExprNode& n = nodes_[idx];
  if (!source_.empty() && n.end > n.begin && n.end <= source_.size())
    return source_.substr(n.begin, n.end - n.begin);
  std::string out;
  unparse_node(idx, out);
  return out;
}

// ---------------------------------------------------------------------------
// Unparse

namespace {

// Higher binds tighter. Matches the grammar: ^ above unary minus above * /
// above + -. Atoms and calls never need parentheses.
int precedence(const ExprNode& n) {
  switch (n.kind) {
    case ExprKind::Number:
    case ExprKind::Variable:
    case ExprKind::Call:
      return 5;
    case ExprKind::Neg:
      return 3;
    case ExprKind::Binary:
      switch (n.bop) {
        case BinaryOp::Add:
        case BinaryOp::Sub: return 1;
        case BinaryOp::Mul:
        case BinaryOp::Div: return 2;
        case BinaryOp::Pow: return 4;
      }
  }
  return 5;
}

char op_char(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return '+';
    case BinaryOp::Sub: return '-';
    case BinaryOp::Mul: return '*';
    case BinaryOp::Div: return '/';
    case BinaryOp::Pow: return '^';
  }
  return '?';
}

} // namespace

std::string Expr::unparse() const {
  std::string out;
  unparse_node(root_, out);
  return out;
}

void Expr::unparse_node(std::uint32_t idx, std::string& out) const {
  const ExprNode& n = nodes_[idx];
  auto emit_child = [&](std::uint32_t child, bool parens) {
    if (parens) out += '(';
    unparse_node(child, out);
    if (parens) out += ')';
  };
  switch (n.kind) {
    case ExprKind::Number:
      out += format17(n.number);
      return;
    case ExprKind::Variable:
      out += 'x';
      out += static_cast<char>('0' + n.var);
      return;
    case ExprKind::Neg:
      out += '-';
      emit_child(n.lhs, precedence(nodes_[n.lhs]) <= 3);
      return;
    case ExprKind::Binary: {
      const int p = precedence(n);
      const bool right_assoc = n.bop == BinaryOp::Pow;
      const int lp = precedence(nodes_[n.lhs]);
      const int rp = precedence(nodes_[n.rhs]);
      emit_child(n.lhs, lp < p || (lp == p && right_assoc));
      out += op_char(n.bop);
      emit_child(n.rhs, rp < p || (rp == p && !right_assoc));
      return;
    }
    case ExprKind::Call:
      out += func_name(n.func);
      out += '(';
      unparse_node(n.lhs, out);
      out += ')';
      return;
  }
}

// ---------------------------------------------------------------------------
// Queries

std::array<bool, 5> Expr::free_variables() const {
  std::array<bool, 5> used{};
  // Arena nodes are all reachable from the root by construction.
  for (const ExprNode& n : nodes_)
    if (n.kind == ExprKind::Variable) used[n.var] = true;
  return used;
}

bool Expr::structurally_equal(const Expr& other) const {
  struct Cmp {
    const Expr& a;
    const Expr& b;
    bool eq(std::uint32_t ia, std::uint32_t ib) const {
      const ExprNode& na = a.nodes_[ia];
      const ExprNode& nb = b.nodes_[ib];
      if (na.kind != nb.kind) return false;
      switch (na.kind) {
        case ExprKind::Number: return na.number == nb.number;
        case ExprKind::Variable: return na.var == nb.var;
        case ExprKind::Neg: return eq(na.lhs, nb.lhs);
        case ExprKind::Binary:
          return na.bop == nb.bop && eq(na.lhs, nb.lhs) && eq(na.rhs, nb.rhs);
        case ExprKind::Call:
          return na.func == nb.func && eq(na.lhs, nb.lhs);
      }
      return false;
    }
  };
  return Cmp{*this, other}.eq(root_, other.root_);
}

std::optional<double> Expr::constant_value() const {
  const ExprNode& n = nodes_[root_];
  if (n.kind == ExprKind::Number) return n.number;
  return std::nullopt;
}

} // namespace thread5d
