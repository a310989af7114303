#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "thread5d/errors.hpp"
#include "thread5d/jet.hpp"

namespace thread5d {

using Point5 = std::array<double, 5>;

enum class ExprKind : std::uint8_t { Number, Variable, Neg, Binary, Call };
enum class BinaryOp : std::uint8_t { Add, Sub, Mul, Div, Pow };
enum class FuncId : std::uint8_t { Sin, Cos, Tan, Exp, Log, Sqrt, Sinh, Cosh, Tanh, Abs };

// One AST node in the arena. Children are indices into the owning arena.
struct ExprNode {
  ExprKind kind = ExprKind::Number;
  double number = 0.0;
  std::uint8_t var = 0;          // Variable: coordinate axis 0..4
  BinaryOp bop = BinaryOp::Add;  // Binary
  FuncId func = FuncId::Sin;     // Call
  std::uint32_t lhs = 0;         // Binary left / Neg and Call operand
  std::uint32_t rhs = 0;         // Binary right
  std::uint32_t begin = 0;       // source span [begin, end), bytes
  std::uint32_t end = 0;
};

// Immutable scalar field of the five coordinates x0..x4.
//
// Grammar (see docs/expression-grammar.md):
//   expr   := term (('+' | '-') term)*
//   term   := factor (('*' | '/') factor)*
//   factor := '-' factor | power
//   power  := atom ('^' factor)?          right-associative
//   atom   := number | 'x0'..'x4' | 'pi' | 'e' | func '(' expr ')' | '(' expr ')'
//
// '^' binds tighter than unary minus, so -x0^2 is -(x0^2); pi and e fold to
// literals at parse time. Evaluation produces a Jet5 (value plus the exact
// gradient) via forward-mode arithmetic.
class Expr {
 public:
  // Throws ParseError with a byte offset and an expected-token set.
  static Expr parse(std::string_view source);

  // Programmatic construction, used to compose derived fields (for example
  // h = f^2 * g for the warped-product family). Spans are empty.
  static Expr number(double value);
  static Expr variable(int axis);
  static Expr binary(BinaryOp op, const Expr& lhs, const Expr& rhs);
  static Expr call(FuncId f, const Expr& arg);

  // Value plus gradient at p. Throws EvalDomainError on domain violations
  // (division by exact zero, log of non-positive, sqrt of negative,
  // non-integer power of a non-positive base).
  Jet5 eval_jet(const Point5& p) const;

  // Canonical text form; parse(unparse()) reproduces the tree exactly.
  std::string unparse() const;

  // Which coordinates the expression mentions (after constant folding).
  std::array<bool, 5> free_variables() const;

  bool structurally_equal(const Expr& other) const;

  // The literal value when the whole tree is a single numeric node.
  std::optional<double> constant_value() const;
  const std::string& source() const { return source_; }

 private:
  friend class ExprParser;
  std::uint32_t add(ExprNode n);
  std::uint32_t graft(const Expr& other);  // append other's nodes, return its root
  Jet5 eval_node(std::uint32_t idx, const Point5& p) const;
  void unparse_node(std::uint32_t idx, std::string& out) const;
  std::string node_text(std::uint32_t idx) const;
  [[noreturn]] void domain_error(std::uint32_t idx, const std::string& what) const;

  std::vector<ExprNode> nodes_;
  std::uint32_t root_ = 0;
  std::string source_;  // original text when parsed; empty when composed
};

} // namespace thread5d
