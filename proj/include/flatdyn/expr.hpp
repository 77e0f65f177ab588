#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flatdyn/types.hpp"

namespace flatdyn {

enum class Op { Constant, Variable, Add, Sub, Mul, Div, Pow, Neg, Exp, Ln, Abs, Sqrt, Sin, Cos };

/// Number of child nodes an operator takes.
int op_arity(Op op) noexcept;

/// Immutable handle to an expression tree node. Copies share structure.
class Expr {
public:
  static Expr constant(double value);
  /// 1-based variable index.
  static Expr variable(int index);
  static Expr unary(Op op, Expr arg);
  static Expr binary(Op op, Expr lhs, Expr rhs);

  Op op() const noexcept;
  /// Only meaningful for Op::Constant.
  double value() const noexcept;
  /// Only meaningful for Op::Variable.
  int index() const noexcept;
  const Expr& arg(std::size_t i) const;
  std::size_t size() const noexcept;

  bool is_constant() const noexcept { return op() == Op::Constant; }
  bool is_constant(double v) const noexcept { return is_constant() && value() == v; }

private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);

/// Largest variable index referenced in the tree (0 if none).
int max_variable_index(const Expr& e);

/// True when the tree references no variables.
bool is_closed(const Expr& e);

/// Exact structural equality (constants compared bitwise by value).
bool structurally_equal(const Expr& a, const Expr& b);

/// Evaluates with real semantics; throws DomainError on ln/sqrt outside their domain,
/// division by zero, non-integer powers of non-positive bases, or a non-finite result.
double evaluate(const Expr& e, const Eigen::Ref<const Vector>& point);

/// Exact symbolic partial derivative with respect to the 1-based variable `var`.
/// The result is not simplified.
Expr differentiate(const Expr& e, int var);

/// Constant folding and identity elimination. Preserves value on the common domain.
Expr simplify(const Expr& e);

/// Infix text that parses back to a tree with identical evaluation.
std::string to_string(const Expr& e);

/// Shortest decimal form of `v` that reads back to the same double.
std::string format_number(double v);

/// A real-valued function of `arity` variables.
///
/// `origin_value`, when set, is returned for any point with norm below
/// `kOriginRadius`. This is how removable singularities such as exp(-1/|x|^2)
/// extended by 0 are represented without piecewise syntax.
class ParsedFunction {
public:
  static constexpr double kOriginRadius = 1e-12;

  ParsedFunction(int arity, Expr body, std::string source_text = {},
                 std::optional<double> origin_value = std::nullopt);

  int arity() const noexcept { return arity_; }
  const Expr& body() const noexcept { return body_; }
  const std::string& source_text() const noexcept { return source_text_; }
  const std::optional<double>& origin_value() const noexcept { return origin_value_; }

  ParsedFunction with_origin_value(std::optional<double> value) const;

  double operator()(const Eigen::Ref<const Vector>& point) const;

private:
  int arity_;
  Expr body_;
  std::string source_text_;
  std::optional<double> origin_value_;
};

/// Grammar: infix `+ - * / ^`, unary minus, calls exp/ln/abs/sqrt/sin/cos,
/// variables x1..xn, decimal literals. `^` is right-associative and binds
/// tighter than unary minus, so -x1^2 is -(x1^2).
ParsedFunction parse(std::string_view text, int arity);

double evaluate(const ParsedFunction& f, const Eigen::Ref<const Vector>& point);
ParsedFunction differentiate(const ParsedFunction& f, int var);
ParsedFunction simplify(const ParsedFunction& f);
std::string to_string(const ParsedFunction& f);

}  // namespace flatdyn
