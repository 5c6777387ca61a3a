#include "devmap/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace devmap {
namespace detail {

enum class Op {
    Constant,
    Variable,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Neg,
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
};

struct ExprNode {
    Op op = Op::Constant;
    double value = 0.0; // Constant
    int index = 0;      // Variable
    int exponent = 0;   // Pow
    std::shared_ptr<const ExprNode> a, b;
};

using NodePtr = std::shared_ptr<const ExprNode>;

namespace {

NodePtr make_const(double v)
{
    auto n = std::make_shared<ExprNode>();
    n->op = Op::Constant;
    n->value = v;
    return n;
}

NodePtr make_var(int index)
{
    auto n = std::make_shared<ExprNode>();
    n->op = Op::Variable;
    n->index = index;
    return n;
}

bool is_const(const NodePtr& n, double v)
{
    return n->op == Op::Constant && n->value == v;
}

NodePtr make_unary(Op op, NodePtr a);

NodePtr make_binary(Op op, NodePtr a, NodePtr b)
{
    const bool ac = a->op == Op::Constant;
    const bool bc = b->op == Op::Constant;
    switch (op) {
    case Op::Add:
        if (ac && bc) return make_const(a->value + b->value);
        if (is_const(a, 0.0)) return b;
        if (is_const(b, 0.0)) return a;
        break;
    case Op::Sub:
        if (ac && bc) return make_const(a->value - b->value);
        if (is_const(b, 0.0)) return a;
        if (is_const(a, 0.0)) return make_unary(Op::Neg, b);
        break;
    case Op::Mul:
        if (ac && bc) return make_const(a->value * b->value);
        if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
        if (is_const(a, 1.0)) return b;
        if (is_const(b, 1.0)) return a;
        if (is_const(a, -1.0)) return make_unary(Op::Neg, b);
        if (is_const(b, -1.0)) return make_unary(Op::Neg, a);
        break;
    case Op::Div:
        if (is_const(a, 0.0)) return make_const(0.0);
        if (is_const(b, 1.0)) return a;
        if (ac && bc && b->value != 0.0) return make_const(a->value / b->value);
        break;
    default:
        break;
    }
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

NodePtr make_pow(NodePtr a, int exponent)
{
    if (exponent == 0) return make_const(1.0);
    if (exponent == 1) return a;
    if (a->op == Op::Constant) {
        const double v = std::pow(a->value, exponent);
        if (std::isfinite(v)) return make_const(v);
    }
    auto n = std::make_shared<ExprNode>();
    n->op = Op::Pow;
    n->exponent = exponent;
    n->a = std::move(a);
    return n;
}

double apply_unary(Op op, double v)
{
    switch (op) {
    case Op::Neg: return -v;
    case Op::Sin: return std::sin(v);
    case Op::Cos: return std::cos(v);
    case Op::Tan: return std::tan(v);
    case Op::Exp: return std::exp(v);
    case Op::Log: return std::log(v);
    case Op::Sqrt: return std::sqrt(v);
    default: return v;
    }
}

NodePtr make_unary(Op op, NodePtr a)
{
    if (op == Op::Neg && a->op == Op::Neg) return a->a;
    if (a->op == Op::Constant) {
        const double v = apply_unary(op, a->value);
        if (std::isfinite(v)) return make_const(v);
    }
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->a = std::move(a);
    return n;
}

double eval_node(const ExprNode& n, std::span<const double> x)
{
    switch (n.op) {
    case Op::Constant: return n.value;
    case Op::Variable: return x[static_cast<std::size_t>(n.index)];
    case Op::Add: return eval_node(*n.a, x) + eval_node(*n.b, x);
    case Op::Sub: return eval_node(*n.a, x) - eval_node(*n.b, x);
    case Op::Mul: return eval_node(*n.a, x) * eval_node(*n.b, x);
    case Op::Div: return eval_node(*n.a, x) / eval_node(*n.b, x);
    case Op::Pow: return std::pow(eval_node(*n.a, x), n.exponent);
    default: return apply_unary(n.op, eval_node(*n.a, x));
    }
}

NodePtr diff_node(const NodePtr& n, int index)
{
    switch (n->op) {
    case Op::Constant: return make_const(0.0);
    case Op::Variable: return make_const(n->index == index ? 1.0 : 0.0);
    case Op::Add: return make_binary(Op::Add, diff_node(n->a, index), diff_node(n->b, index));
    case Op::Sub: return make_binary(Op::Sub, diff_node(n->a, index), diff_node(n->b, index));
    case Op::Mul:
        return make_binary(Op::Add,
                           make_binary(Op::Mul, diff_node(n->a, index), n->b),
                           make_binary(Op::Mul, n->a, diff_node(n->b, index)));
    case Op::Div:
        return make_binary(Op::Div,
                           make_binary(Op::Sub,
                                       make_binary(Op::Mul, diff_node(n->a, index), n->b),
                                       make_binary(Op::Mul, n->a, diff_node(n->b, index))),
                           make_pow(n->b, 2));
    case Op::Pow:
        return make_binary(Op::Mul,
                           make_binary(Op::Mul, make_const(static_cast<double>(n->exponent)),
                                       make_pow(n->a, n->exponent - 1)),
                           diff_node(n->a, index));
    case Op::Neg: return make_unary(Op::Neg, diff_node(n->a, index));
    case Op::Sin: return make_binary(Op::Mul, make_unary(Op::Cos, n->a), diff_node(n->a, index));
    case Op::Cos:
        return make_unary(Op::Neg,
                          make_binary(Op::Mul, make_unary(Op::Sin, n->a), diff_node(n->a, index)));
    case Op::Tan:
        return make_binary(Op::Div, diff_node(n->a, index),
                           make_pow(make_unary(Op::Cos, n->a), 2));
    case Op::Exp: return make_binary(Op::Mul, n, diff_node(n->a, index));
    case Op::Log: return make_binary(Op::Div, diff_node(n->a, index), n->a);
    case Op::Sqrt:
        return make_binary(Op::Div, diff_node(n->a, index),
                           make_binary(Op::Mul, make_const(2.0), n));
    }
    return make_const(0.0);
}

int precedence(Op op)
{
    switch (op) {
    case Op::Add:
    case Op::Sub: return 1;
    case Op::Mul:
    case Op::Div: return 2;
    case Op::Neg: return 3;
    case Op::Pow: return 4;
    default: return 5;
    }
}

void print_node(const ExprNode& n, std::ostringstream& out);

void print_child(const NodePtr& c, int parent_prec, std::ostringstream& out)
{
    if (precedence(c->op) < parent_prec) {
        out << '(';
        print_node(*c, out);
        out << ')';
    } else {
        print_node(*c, out);
    }
}

void print_node(const ExprNode& n, std::ostringstream& out)
{
    switch (n.op) {
    case Op::Constant: {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", n.value);
        out << buf;
        break;
    }
    case Op::Variable: out << 'x' << (n.index + 1); break;
    case Op::Add:
        print_child(n.a, 1, out);
        out << '+';
        print_child(n.b, 2, out);
        break;
    case Op::Sub:
        print_child(n.a, 1, out);
        out << '-';
        print_child(n.b, 2, out);
        break;
    case Op::Mul:
        print_child(n.a, 2, out);
        out << '*';
        print_child(n.b, 3, out);
        break;
    case Op::Div:
        print_child(n.a, 2, out);
        out << '/';
        print_child(n.b, 3, out);
        break;
    case Op::Pow:
        print_child(n.a, 5, out);
        out << '^' << n.exponent;
        break;
    case Op::Neg:
        out << '-';
        print_child(n.a, 3, out);
        break;
    case Op::Sin: out << "sin("; print_node(*n.a, out); out << ')'; break;
    case Op::Cos: out << "cos("; print_node(*n.a, out); out << ')'; break;
    case Op::Tan: out << "tan("; print_node(*n.a, out); out << ')'; break;
    case Op::Exp: out << "exp("; print_node(*n.a, out); out << ')'; break;
    case Op::Log: out << "log("; print_node(*n.a, out); out << ')'; break;
    case Op::Sqrt: out << "sqrt("; print_node(*n.a, out); out << ')'; break;
    }
}

// Recursive-descent parser over the grammar in the header. Offsets in errors
// are 1-based byte positions.
class Parser {
public:
    Parser(const std::string& src, int dim) : src_(src), dim_(dim) {}

    NodePtr run()
    {
        NodePtr e = parse_expr();
        skip_ws();
        if (pos_ != src_.size()) fail("unexpected trailing input");
        return e;
    }

private:
    const std::string& src_;
    int dim_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_ + 1); }
    [[noreturn]] void fail_at(const std::string& msg, std::size_t at) const
    {
        throw ParseError(msg, at + 1);
    }

    void skip_ws()
    {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool eat(char c)
    {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek()
    {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    NodePtr parse_expr()
    {
        NodePtr e = parse_term();
        for (;;) {
            if (eat('+')) e = make_binary(Op::Add, e, parse_term());
            else if (eat('-')) e = make_binary(Op::Sub, e, parse_term());
            else return e;
        }
    }

    NodePtr parse_term()
    {
        NodePtr e = parse_factor();
        for (;;) {
            if (eat('*')) e = make_binary(Op::Mul, e, parse_factor());
            else if (eat('/')) e = make_binary(Op::Div, e, parse_factor());
            else return e;
        }
    }

    NodePtr parse_factor()
    {
        if (eat('-')) return make_unary(Op::Neg, parse_factor());
        return parse_power();
    }

    NodePtr parse_power()
    {
        NodePtr base = parse_atom();
        if (eat('^')) return make_pow(base, parse_integer());
        return base;
    }

    int parse_integer()
    {
        skip_ws();
        std::size_t start = pos_;
        if (pos_ < src_.size() && src_[pos_] == '-') ++pos_;
        std::size_t digits = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (pos_ == digits) fail("expected integer exponent");
        return std::atoi(src_.substr(start, pos_ - start).c_str());
    }

    NodePtr parse_atom()
    {
        skip_ws();
        if (pos_ >= src_.size()) fail("unexpected end of input");
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = parse_expr();
            if (!eat(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
        fail("unexpected character");
    }

    NodePtr parse_number()
    {
        std::size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        }
        if (pos_ == start || (pos_ == start + 1 && src_[start] == '.'))
            fail_at("malformed number", start);
        // Exponent part only when digits follow; otherwise leave 'e' alone.
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t mark = pos_;
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                    ++pos_;
            } else {
                pos_ = mark;
            }
        }
        return make_const(std::strtod(src_.substr(start, pos_ - start).c_str(), nullptr));
    }

    NodePtr parse_ident()
    {
        std::size_t start = pos_;
        while (pos_ < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        const std::string name = src_.substr(start, pos_ - start);
        if (name == "x") {
            std::size_t digits = pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            if (pos_ == digits) fail_at("expected variable index after 'x'", digits);
            const int index = std::atoi(src_.substr(digits, pos_ - digits).c_str());
            if (index < 1 || index > dim_)
                fail_at("variable index " + std::to_string(index) + " exceeds dimension "
                            + std::to_string(dim_),
                        start);
            return make_var(index - 1);
        }
        if (name == "pi") return make_const(3.14159265358979323846);
        if (name == "e") return make_const(2.71828182845904523536);
        if (name == "sin" || name == "cos" || name == "tan" || name == "exp" || name == "log"
            || name == "sqrt") {
            if (!eat('(')) fail("expected '(' after function name");
            NodePtr arg = parse_expr();
            if (!eat(')')) fail("expected ')'");
            if (name == "sin") return make_unary(Op::Sin, arg);
            if (name == "cos") return make_unary(Op::Cos, arg);
            if (name == "tan") return make_unary(Op::Tan, arg);
            if (name == "exp") return make_unary(Op::Exp, arg);
            if (name == "log") return make_unary(Op::Log, arg);
            return make_unary(Op::Sqrt, arg);
        }
        fail_at("unknown identifier '" + name + "'", start);
    }
};

} // namespace
} // namespace detail

using detail::ExprNode;
using detail::NodePtr;
using detail::Op;

ScalarField ScalarField::constant(double value, int dim)
{
    return ScalarField(detail::make_const(value), dim);
}

ScalarField ScalarField::variable(int index, int dim)
{
    if (index < 0 || index >= dim)
        throw ValidationError("variable index out of range for dimension");
    return ScalarField(detail::make_var(index), dim);
}

double ScalarField::eval(std::span<const double> x) const
{
    if (!root_) throw EvalError("empty scalar field");
    if (static_cast<int>(x.size()) < dim_)
        throw EvalError("evaluation point has too few coordinates");
    const double v = detail::eval_node(*root_, x);
    if (!std::isfinite(v)) {
        std::ostringstream os;
        os << "non-finite value from '" << to_string() << "' at (";
        for (int i = 0; i < dim_; ++i) os << (i ? "," : "") << x[static_cast<std::size_t>(i)];
        os << ")";
        throw EvalError(os.str());
    }
    return v;
}

ScalarField ScalarField::derivative(int index) const
{
    if (!root_) throw EvalError("empty scalar field");
    if (index < 0 || index >= dim_) throw ValidationError("derivative index out of range");
    return ScalarField(detail::diff_node(root_, index), dim_);
}

bool ScalarField::is_constant() const
{
    return root_ && root_->op == Op::Constant;
}

double ScalarField::constant_value() const
{
    return root_ ? root_->value : 0.0;
}

std::string ScalarField::to_string() const
{
    if (!root_) return "";
    std::ostringstream os;
    detail::print_node(*root_, os);
    return os.str();
}

ScalarField parse_scalar_field(const std::string& src, int dim)
{
    if (dim < 0) throw ValidationError("negative dimension");
    return ScalarField(detail::Parser(src, dim).run(), dim);
}

namespace {
int common_dim(const ScalarField& a, const ScalarField& b)
{
    if (a.dim() != b.dim()) throw ValidationError("scalar field dimension mismatch");
    return a.dim();
}
} // namespace

ScalarField operator+(const ScalarField& a, const ScalarField& b)
{
    return ScalarField(detail::make_binary(Op::Add, a.root_, b.root_), common_dim(a, b));
}
ScalarField operator-(const ScalarField& a, const ScalarField& b)
{
    return ScalarField(detail::make_binary(Op::Sub, a.root_, b.root_), common_dim(a, b));
}
ScalarField operator*(const ScalarField& a, const ScalarField& b)
{
    return ScalarField(detail::make_binary(Op::Mul, a.root_, b.root_), common_dim(a, b));
}
ScalarField operator/(const ScalarField& a, const ScalarField& b)
{
    return ScalarField(detail::make_binary(Op::Div, a.root_, b.root_), common_dim(a, b));
}
ScalarField operator-(const ScalarField& a)
{
    return ScalarField(detail::make_unary(Op::Neg, a.root_), a.dim());
}
ScalarField pow(const ScalarField& a, int exponent)
{
    return ScalarField(detail::make_pow(a.root_, exponent), a.dim());
}
ScalarField sin(const ScalarField& a)
{
    return ScalarField(detail::make_unary(Op::Sin, a.root_), a.dim());
}
ScalarField cos(const ScalarField& a)
{
    return ScalarField(detail::make_unary(Op::Cos, a.root_), a.dim());
}
ScalarField tan(const ScalarField& a)
{
    return ScalarField(detail::make_unary(Op::Tan, a.root_), a.dim());
}
ScalarField exp(const ScalarField& a)
{
    return ScalarField(detail::make_unary(Op::Exp, a.root_), a.dim());
}
ScalarField log(const ScalarField& a)
{
    return ScalarField(detail::make_unary(Op::Log, a.root_), a.dim());
}
ScalarField sqrt(const ScalarField& a)
{
    return ScalarField(detail::make_unary(Op::Sqrt, a.root_), a.dim());
}

} // namespace devmap
