#include "flatdyn/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "flatdyn/errors.hpp"

namespace flatdyn {

struct Expr::Node {
  Op op;
  double value = 0.0;
  int index = 0;
  std::vector<Expr> args;
};

int op_arity(Op op) noexcept {
  switch (op) {
    case Op::Constant:
    case Op::Variable:
      return 0;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
    case Op::Pow:
      return 2;
    default:
      return 1;
  }
}

Expr Expr::constant(double value) {
  return Expr(std::make_shared<const Node>(Node{Op::Constant, value, 0, {}}));
}

Expr Expr::variable(int index) {
  if (index < 1) throw ArityError("variable index must be >= 1, got " + std::to_string(index));
  return Expr(std::make_shared<const Node>(Node{Op::Variable, 0.0, index, {}}));
}

Expr Expr::unary(Op op, Expr arg) {
  if (op_arity(op) != 1) throw InvalidArgument("operator is not unary");
  return Expr(std::make_shared<const Node>(Node{op, 0.0, 0, {std::move(arg)}}));
}

Expr Expr::binary(Op op, Expr lhs, Expr rhs) {
  if (op_arity(op) != 2) throw InvalidArgument("operator is not binary");
  return Expr(std::make_shared<const Node>(Node{op, 0.0, 0, {std::move(lhs), std::move(rhs)}}));
}

Op Expr::op() const noexcept { return node_->op; }
double Expr::value() const noexcept { return node_->value; }
int Expr::index() const noexcept { return node_->index; }
const Expr& Expr::arg(std::size_t i) const { return node_->args.at(i); }
std::size_t Expr::size() const noexcept { return node_->args.size(); }

Expr operator+(const Expr& a, const Expr& b) { return Expr::binary(Op::Add, a, b); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::binary(Op::Sub, a, b); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::binary(Op::Mul, a, b); }
Expr operator/(const Expr& a, const Expr& b) { return Expr::binary(Op::Div, a, b); }
Expr operator-(const Expr& a) { return Expr::unary(Op::Neg, a); }

int max_variable_index(const Expr& e) {
  if (e.op() == Op::Variable) return e.index();
  int m = 0;
  for (std::size_t i = 0; i < e.size(); ++i) m = std::max(m, max_variable_index(e.arg(i)));
  return m;
}

bool is_closed(const Expr& e) { return max_variable_index(e) == 0; }

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.op() != b.op() || a.size() != b.size()) return false;
  if (a.op() == Op::Constant) return a.value() == b.value();
  if (a.op() == Op::Variable) return a.index() == b.index();
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!structurally_equal(a.arg(i), b.arg(i))) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

bool is_integer(double v) { return std::isfinite(v) && std::floor(v) == v; }

double checked(double v, const char* what) {
  if (!std::isfinite(v)) throw DomainError(std::string("non-finite result in ") + what);
  return v;
}

double eval_pow(double base, double exponent) {
  if (is_integer(exponent)) {
    if (base == 0.0 && exponent < 0.0) throw DomainError("division by zero: 0 raised to a negative power");
    return checked(std::pow(base, exponent), "pow");
  }
  if (!(base > 0.0)) throw DomainError("non-integer power of a non-positive base");
  return checked(std::pow(base, exponent), "pow");
}

}  // namespace

double evaluate(const Expr& e, const Eigen::Ref<const Vector>& point) {
  switch (e.op()) {
    case Op::Constant:
      return e.value();
    case Op::Variable:
      if (e.index() > point.size())
        throw ArityError("variable x" + std::to_string(e.index()) + " outside point of length " +
                         std::to_string(point.size()));
      return point(e.index() - 1);
    case Op::Add:
      return checked(evaluate(e.arg(0), point) + evaluate(e.arg(1), point), "addition");
    case Op::Sub:
      return checked(evaluate(e.arg(0), point) - evaluate(e.arg(1), point), "subtraction");
    case Op::Mul:
      return checked(evaluate(e.arg(0), point) * evaluate(e.arg(1), point), "multiplication");
    case Op::Div: {
      const double num = evaluate(e.arg(0), point);
      const double den = evaluate(e.arg(1), point);
      if (den == 0.0) throw DomainError("division by zero");
      return checked(num / den, "division");
    }
    case Op::Pow:
      return eval_pow(evaluate(e.arg(0), point), evaluate(e.arg(1), point));
    case Op::Neg:
      return -evaluate(e.arg(0), point);
    case Op::Exp:
      return checked(std::exp(evaluate(e.arg(0), point)), "exp");
    case Op::Ln: {
      const double u = evaluate(e.arg(0), point);
      if (!(u > 0.0)) throw DomainError("ln of a non-positive value");
      return std::log(u);
    }
    case Op::Abs:
      return std::abs(evaluate(e.arg(0), point));
    case Op::Sqrt: {
      const double u = evaluate(e.arg(0), point);
      if (u < 0.0) throw DomainError("sqrt of a negative value");
      return std::sqrt(u);
    }
    case Op::Sin:
      return std::sin(evaluate(e.arg(0), point));
    case Op::Cos:
      return std::cos(evaluate(e.arg(0), point));
  }
  throw InvalidArgument("unknown operator");
}

// ---------------------------------------------------------------------------
// Differentiation

Expr differentiate(const Expr& e, int var) {
  const auto c = [](double v) { return Expr::constant(v); };
  switch (e.op()) {
    case Op::Constant:
      return c(0.0);
    case Op::Variable:
      return c(e.index() == var ? 1.0 : 0.0);
    case Op::Add:
      return differentiate(e.arg(0), var) + differentiate(e.arg(1), var);
    case Op::Sub:
      return differentiate(e.arg(0), var) - differentiate(e.arg(1), var);
    case Op::Mul: {
      const Expr& u = e.arg(0);
      const Expr& v = e.arg(1);
      return differentiate(u, var) * v + u * differentiate(v, var);
    }
    case Op::Div: {
      const Expr& u = e.arg(0);
      const Expr& v = e.arg(1);
      return (differentiate(u, var) * v - u * differentiate(v, var)) /
             Expr::binary(Op::Pow, v, c(2.0));
    }
    case Op::Pow: {
      const Expr& base = e.arg(0);
      const Expr& exponent = e.arg(1);
      if (is_closed(exponent)) {
        // Power rule keeps integer powers of negative bases differentiable.
        const double k = evaluate(exponent, Vector());
        return c(k) * Expr::binary(Op::Pow, base, c(k - 1.0)) * differentiate(base, var);
      }
      // d(a^b) = a^b * (b' ln a + b a' / a)
      return e * (differentiate(exponent, var) * Expr::unary(Op::Ln, base) +
                  exponent * differentiate(base, var) / base);
    }
    case Op::Neg:
      return -differentiate(e.arg(0), var);
    case Op::Exp:
      return e * differentiate(e.arg(0), var);
    case Op::Ln:
      return differentiate(e.arg(0), var) / e.arg(0);
    case Op::Abs:
      // sign(u) = u/|u| raises DomainError at u = 0.
      return e.arg(0) / e * differentiate(e.arg(0), var);
    case Op::Sqrt:
      return differentiate(e.arg(0), var) / (c(2.0) * e);
    case Op::Sin:
      return Expr::unary(Op::Cos, e.arg(0)) * differentiate(e.arg(0), var);
    case Op::Cos:
      return -(Expr::unary(Op::Sin, e.arg(0)) * differentiate(e.arg(0), var));
  }
  throw InvalidArgument("unknown operator");
}

// ---------------------------------------------------------------------------
// Simplification

Expr simplify(const Expr& e) {
  if (e.size() == 0) return e;

  std::vector<Expr> args;
  args.reserve(e.size());
  bool all_constant = true;
  for (std::size_t i = 0; i < e.size(); ++i) {
    args.push_back(simplify(e.arg(i)));
    all_constant = all_constant && args.back().is_constant();
  }
  const Expr rebuilt =
      args.size() == 1 ? Expr::unary(e.op(), args[0]) : Expr::binary(e.op(), args[0], args[1]);

  if (all_constant) {
    try {
      return Expr::constant(evaluate(rebuilt, Vector()));
    } catch (const DomainError&) {
      return rebuilt;
    }
  }

  switch (e.op()) {
    case Op::Add:
      if (args[0].is_constant(0.0)) return args[1];
      if (args[1].is_constant(0.0)) return args[0];
      break;
    case Op::Sub:
      if (args[1].is_constant(0.0)) return args[0];
      if (args[0].is_constant(0.0)) return simplify(-args[1]);
      break;
    case Op::Mul:
      if (args[0].is_constant(0.0) || args[1].is_constant(0.0)) return Expr::constant(0.0);
      if (args[0].is_constant(1.0)) return args[1];
      if (args[1].is_constant(1.0)) return args[0];
      break;
    case Op::Div:
      if (args[0].is_constant(0.0)) return Expr::constant(0.0);
      if (args[1].is_constant(1.0)) return args[0];
      break;
    case Op::Pow:
      if (args[1].is_constant(1.0)) return args[0];
      if (args[1].is_constant(0.0)) return Expr::constant(1.0);
      break;
    case Op::Neg:
      if (args[0].op() == Op::Neg) return args[0].arg(0);
      break;
    default:
      break;
  }
  return rebuilt;
}

// ---------------------------------------------------------------------------
// Printing

std::string format_number(double v) {
  char buf[32];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

namespace {

constexpr int kAdd = 1, kMul = 2, kUnary = 3, kPow = 4, kAtom = 5;

int precedence(const Expr& e) {
  switch (e.op()) {
    case Op::Constant:
      return std::signbit(e.value()) ? kUnary : kAtom;
    case Op::Variable:
      return kAtom;
    case Op::Add:
    case Op::Sub:
      return kAdd;
    case Op::Mul:
    case Op::Div:
      return kMul;
    case Op::Neg:
      return kUnary;
    case Op::Pow:
      return kPow;
    default:
      return kAtom;
  }
}

const char* function_name(Op op) {
  switch (op) {
    case Op::Exp: return "exp";
    case Op::Ln: return "ln";
    case Op::Abs: return "abs";
    case Op::Sqrt: return "sqrt";
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    default: return nullptr;
  }
}

void print(const Expr& e, std::string& out);

void print_child(const Expr& child, int required, std::string& out) {
  const bool wrap = precedence(child) < required;
  if (wrap) out += '(';
  print(child, out);
  if (wrap) out += ')';
}

void print_binary(const Expr& e, const char* symbol, int level, std::string& out) {
  // A leading minus on the left of * or / would re-parse as negating the whole term.
  int left_required = level;
  if (level == kMul && precedence(e.arg(0)) == kUnary) left_required = kPow;
  print_child(e.arg(0), left_required, out);
  out += symbol;
  print_child(e.arg(1), level + 1, out);
}

void print(const Expr& e, std::string& out) {
  switch (e.op()) {
    case Op::Constant:
      out += format_number(e.value());
      return;
    case Op::Variable:
      out += 'x';
      out += std::to_string(e.index());
      return;
    case Op::Add: print_binary(e, " + ", kAdd, out); return;
    case Op::Sub: print_binary(e, " - ", kAdd, out); return;
    case Op::Mul: print_binary(e, " * ", kMul, out); return;
    case Op::Div: print_binary(e, " / ", kMul, out); return;
    case Op::Pow:
      print_child(e.arg(0), kAtom, out);
      out += '^';
      print_child(e.arg(1), kUnary, out);
      return;
    case Op::Neg:
      out += '-';
      print_child(e.arg(0), kUnary, out);
      return;
    default:
      out += function_name(e.op());
      out += '(';
      print(e.arg(0), out);
      out += ')';
      return;
  }
}

}  // namespace

std::string to_string(const Expr& e) {
  std::string out;
  print(e, out);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class Parser {
public:
  Parser(std::string_view text, int arity) : text_(text), arity_(arity) {}

  Expr parse_all() {
    Expr e = parse_expression();
    skip_space();
    if (pos_ != text_.size()) fail("operator or end of input");
    return e;
  }

private:
  // expression := ['-'] term (('+' | '-') term)*
  Expr parse_expression() {
    skip_space();
    Expr e = peek() == '-' ? (++pos_, -parse_term()) : parse_term();
    for (;;) {
      skip_space();
      const char ch = peek();
      if (ch != '+' && ch != '-') return e;
      ++pos_;
      Expr rhs = parse_term();
      e = ch == '+' ? e + rhs : e - rhs;
    }
  }

  // term := unary (('*' | '/') unary)*
  Expr parse_term() {
    Expr e = parse_unary();
    for (;;) {
      skip_space();
      const char ch = peek();
      if (ch != '*' && ch != '/') return e;
      ++pos_;
      Expr rhs = parse_unary();
      e = ch == '*' ? e * rhs : e / rhs;
    }
  }

  // unary := '-' unary | power
  Expr parse_unary() {
    skip_space();
    if (peek() == '-') {
      ++pos_;
      return -parse_unary();
    }
    return parse_power();
  }

  // power := primary ['^' unary]
  Expr parse_power() {
    Expr base = parse_primary();
    skip_space();
    if (peek() != '^') return base;
    ++pos_;
    return Expr::binary(Op::Pow, base, parse_unary());
  }

  Expr parse_primary() {
    skip_space();
    const char ch = peek();
    if (ch == '(') {
      ++pos_;
      Expr inner = parse_expression();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(ch))) return parse_identifier();
    fail("operand");
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    const std::string rest(text_.substr(start));
    char* end = nullptr;
    const double v = std::strtod(rest.c_str(), &end);
    const std::size_t consumed = static_cast<std::size_t>(end - rest.c_str());
    if (consumed == 0) fail("number");
    // strtod also accepts hex, inf and nan; restrict to plain decimals.
    for (std::size_t i = 0; i < consumed; ++i) {
      const char c = rest[i];
      if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == 'e' || c == 'E' ||
            c == '+' || c == '-'))
        fail("decimal number");
    }
    pos_ += consumed;
    return Expr::constant(v);
  }

  Expr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);

    if (name.size() > 1 && name[0] == 'x' &&
        name.find_first_not_of("0123456789", 1) == std::string_view::npos) {
      const int index = std::atoi(std::string(name.substr(1)).c_str());
      if (index < 1 || index > arity_)
        throw ArityError("variable " + std::string(name) + " outside arity " +
                         std::to_string(arity_) + " at offset " + std::to_string(start));
      return Expr::variable(index);
    }

    static constexpr std::pair<std::string_view, Op> kFunctions[] = {
        {"exp", Op::Exp}, {"ln", Op::Ln},   {"abs", Op::Abs},
        {"sqrt", Op::Sqrt}, {"sin", Op::Sin}, {"cos", Op::Cos}};
    for (const auto& [fname, op] : kFunctions) {
      if (name == fname) {
        expect('(');
        Expr arg = parse_expression();
        expect(')');
        return Expr::unary(op, arg);
      }
    }
    pos_ = start;
    fail("variable x1..x" + std::to_string(arity_) + " or function exp/ln/abs/sqrt/sin/cos");
  }

  void expect(char ch) {
    skip_space();
    if (peek() != ch) fail(std::string("'") + ch + "'");
    ++pos_;
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(const std::string& expected) const {
    throw SyntaxError(pos_, expected, std::string(text_));
  }

  std::string_view text_;
  int arity_;
  std::size_t pos_ = 0;
};

}  // namespace

// ---------------------------------------------------------------------------
// ParsedFunction

ParsedFunction::ParsedFunction(int arity, Expr body, std::string source_text,
                               std::optional<double> origin_value)
    : arity_(arity), body_(std::move(body)), source_text_(std::move(source_text)),
      origin_value_(origin_value) {
  if (arity_ < 1) throw ArityError("arity must be positive");
  if (max_variable_index(body_) > arity_)
    throw ArityError("expression references x" + std::to_string(max_variable_index(body_)) +
                     " but arity is " + std::to_string(arity_));
  if (source_text_.empty()) source_text_ = to_string(body_);
}

ParsedFunction ParsedFunction::with_origin_value(std::optional<double> value) const {
  ParsedFunction copy = *this;
  copy.origin_value_ = value;
  return copy;
}

double ParsedFunction::operator()(const Eigen::Ref<const Vector>& point) const {
  if (point.size() != arity_)
    throw ArityError("point has length " + std::to_string(point.size()) + ", arity is " +
                     std::to_string(arity_));
  if (origin_value_ && point.norm() < kOriginRadius) return *origin_value_;
  return flatdyn::evaluate(body_, point);
}

ParsedFunction parse(std::string_view text, int arity) {
  if (arity < 1) throw ArityError("arity must be positive");
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos)
    throw SyntaxError(0, "expression", std::string(text));
  return ParsedFunction(arity, Parser(text, arity).parse_all(), std::string(text));
}

double evaluate(const ParsedFunction& f, const Eigen::Ref<const Vector>& point) { return f(point); }

ParsedFunction differentiate(const ParsedFunction& f, int var) {
  if (var < 1 || var > f.arity())
    throw ArityError("cannot differentiate with respect to x" + std::to_string(var) +
                     " at arity " + std::to_string(f.arity()));
  return ParsedFunction(f.arity(), simplify(differentiate(f.body(), var)));
}

ParsedFunction simplify(const ParsedFunction& f) {
  return ParsedFunction(f.arity(), simplify(f.body()), {}, f.origin_value());
}

std::string to_string(const ParsedFunction& f) { return to_string(f.body()); }

}  // namespace flatdyn
