#pragma once

#include "devmap/errors.hpp"

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace devmap {

namespace detail {
struct ExprNode;
}

// Scalar-valued function of chart coordinates x1..xn, stored as an immutable
// expression tree. Supports the grammar
//
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := '-' factor | power
//   power  := atom ('^' integer)?
//   atom   := number | 'x'digits | 'pi' | 'e' | func '(' expr ')' | '(' expr ')'
//   func   := sin | cos | tan | exp | log | sqrt
//
// so '^' binds tightest, then unary minus, then '*'/'/', then '+'/'-', all
// left associative. The set of fields is closed under derivative().
class ScalarField {
public:
    ScalarField() = default;

    static ScalarField constant(double value, int dim);
    static ScalarField variable(int index, int dim); // 0-based, index < dim

    bool valid() const noexcept { return root_ != nullptr; }
    int dim() const noexcept { return dim_; }

    // Evaluates at x (size dim). A non-finite result is an EvalError.
    double eval(std::span<const double> x) const;
    double eval(const std::vector<double>& x) const { return eval(std::span<const double>(x)); }

    // Symbolic partial derivative with respect to x_{index+1}.
    ScalarField derivative(int index) const;

    bool is_constant() const;      // tree folded down to a literal
    double constant_value() const; // only valid when is_constant()

    std::string to_string() const; // parseable round-trip form

private:
    ScalarField(std::shared_ptr<const detail::ExprNode> root, int dim)
        : root_(std::move(root)), dim_(dim) {}

    std::shared_ptr<const detail::ExprNode> root_;
    int dim_ = 0;

    friend ScalarField parse_scalar_field(const std::string& src, int dim);
    friend ScalarField operator+(const ScalarField&, const ScalarField&);
    friend ScalarField operator-(const ScalarField&, const ScalarField&);
    friend ScalarField operator*(const ScalarField&, const ScalarField&);
    friend ScalarField operator/(const ScalarField&, const ScalarField&);
    friend ScalarField operator-(const ScalarField&);
    friend ScalarField pow(const ScalarField&, int exponent);
    friend ScalarField sin(const ScalarField&);
    friend ScalarField cos(const ScalarField&);
    friend ScalarField tan(const ScalarField&);
    friend ScalarField exp(const ScalarField&);
    friend ScalarField log(const ScalarField&);
    friend ScalarField sqrt(const ScalarField&);
};

// Parses `src` as a function of x1..x_dim. Throws ParseError with a 1-based
// byte offset on syntax errors, unknown identifiers, or variable indices
// beyond dim.
ScalarField parse_scalar_field(const std::string& src, int dim);

ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(const ScalarField& a, const ScalarField& b);
ScalarField operator/(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a);
ScalarField pow(const ScalarField& a, int exponent);
ScalarField sin(const ScalarField& a);
ScalarField cos(const ScalarField& a);
ScalarField tan(const ScalarField& a);
ScalarField exp(const ScalarField& a);
ScalarField log(const ScalarField& a);
ScalarField sqrt(const ScalarField& a);

} // namespace devmap
