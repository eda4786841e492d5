#include "pmc/lang/pretty.hpp"

#include "pmc/errors.hpp"

#include <algorithm>

#include <sstream>

namespace pmc::lang {

namespace {

const char* op_text(BinOp op) {
    switch (op) {
        case BinOp::Add: return "+";
        case BinOp::Sub: return "-";
        case BinOp::Mul: return "*";
        case BinOp::Div: return "/";
        case BinOp::Eq: return "=";
        case BinOp::Ne: return "!=";
        case BinOp::Lt: return "<";
        case BinOp::Le: return "<=";
        case BinOp::Gt: return ">";
        case BinOp::Ge: return ">=";
        case BinOp::And: return "&";
        case BinOp::Or: return "|";
    }
    return "?";
}

// Rationals coming from decimal literals have 2^a*5^b denominators and
// render exactly as decimals; anything else falls back to a fraction.
std::string rat_literal(const Rational& q) {
    if (q.is_integer()) return q.numerator().str();
    BigInt den = q.denominator();
    int twos = 0, fives = 0;
    while (den % 2 == 0) {
        den /= 2;
        ++twos;
    }
    while (den % 5 == 0) {
        den /= 5;
        ++fives;
    }
    if (den == 1) return q.decimal_str(std::max(twos, fives));
    return q.numerator().str() + "/" + q.denominator().str();
}

void print_expr(std::ostream& os, const ExprPtr& e) {
    switch (e->kind) {
        case ExprKind::IntLit: os << e->int_value; return;
        case ExprKind::BoolLit: os << (e->bool_value ? "true" : "false"); return;
        case ExprKind::RatLit: os << rat_literal(e->rat_value); return;
        case ExprKind::Ident: os << e->name; return;
        case ExprKind::Unary:
            os << "(" << (e->un_op == UnOp::Not ? "!" : "-");
            print_expr(os, e->args[0]);
            os << ")";
            return;
        case ExprKind::Binary:
            os << "(";
            print_expr(os, e->args[0]);
            os << " " << op_text(e->bin_op) << " ";
            print_expr(os, e->args[1]);
            os << ")";
            return;
        case ExprKind::Ternary:
            os << "(";
            print_expr(os, e->args[0]);
            os << " ? ";
            print_expr(os, e->args[1]);
            os << " : ";
            print_expr(os, e->args[2]);
            os << ")";
            return;
        case ExprKind::ExactlyOneOf:
            os << "ExactlyOneOf(";
            for (std::size_t i = 0; i < e->args.size(); ++i) {
                if (i) os << ", ";
                print_expr(os, e->args[i]);
            }
            os << ")";
            return;
    }
    throw Error(ErrorKind::Internal, "bad expression kind");
}

} // namespace

std::string pretty(const ExprPtr& e) {
    std::ostringstream os;
    print_expr(os, e);
    return os.str();
}

std::string pretty(const Program& p) {
    std::ostringstream os;
    os << "dtmc\n\n";
    for (const auto& c : p.constants) {
        os << "const ";
        switch (c.type) {
            case ConstType::Int: os << "int "; break;
            case ConstType::Double: os << "double "; break;
            case ConstType::Bool: os << "bool "; break;
        }
        os << c.name;
        if (c.value) os << " = " << pretty(c.value);
        os << ";\n";
    }
    for (const auto& m : p.modules) {
        os << "\nmodule " << m.name << "\n";
        for (const auto& v : m.variables) {
            os << "    " << v.name << " : ";
            if (v.is_bool) {
                os << "bool";
            } else {
                os << "[" << pretty(v.low) << ".." << pretty(v.high) << "]";
            }
            if (v.init) os << " init " << pretty(v.init);
            os << ";\n";
        }
        for (const auto& cmd : m.commands) {
            os << "    [" << cmd.action << "] " << pretty(cmd.guard) << " -> ";
            for (std::size_t i = 0; i < cmd.updates.size(); ++i) {
                if (i) os << " + ";
                const auto& u = cmd.updates[i];
                if (u.probability) os << pretty(u.probability) << ": ";
                for (std::size_t j = 0; j < u.assignments.size(); ++j) {
                    if (j) os << " & ";
                    os << "(" << u.assignments[j].variable << "'=" << pretty(u.assignments[j].value)
                       << ")";
                }
            }
            os << ";\n";
        }
        os << "endmodule\n";
    }
    for (const auto& l : p.labels) {
        os << "\nlabel \"" << l.name << "\" = " << pretty(l.expr) << ";";
    }
    if (!p.labels.empty()) os << "\n";
    if (p.init_predicate) {
        os << "\ninit " << pretty(p.init_predicate) << " endinit\n";
    }
    return os.str();
}

} // namespace pmc::lang
