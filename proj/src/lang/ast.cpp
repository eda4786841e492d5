#include "pmc/lang/ast.hpp"

#include <algorithm>

namespace pmc::lang {

ExprPtr Expr::int_lit(long long v, SourcePos pos) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::IntLit;
    e->pos = pos;
    e->int_value = v;
    return e;
}

ExprPtr Expr::bool_lit(bool v, SourcePos pos) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::BoolLit;
    e->pos = pos;
    e->bool_value = v;
    return e;
}

ExprPtr Expr::rat_lit(Rational v, SourcePos pos) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::RatLit;
    e->pos = pos;
    e->rat_value = std::move(v);
    return e;
}

ExprPtr Expr::ident(std::string name, SourcePos pos) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Ident;
    e->pos = pos;
    e->name = std::move(name);
    return e;
}

ExprPtr Expr::unary(UnOp op, ExprPtr arg, SourcePos pos) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Unary;
    e->pos = pos;
    e->un_op = op;
    e->args.push_back(std::move(arg));
    return e;
}

ExprPtr Expr::binary(BinOp op, ExprPtr lhs, ExprPtr rhs, SourcePos pos) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Binary;
    e->pos = pos;
    e->bin_op = op;
    e->args.push_back(std::move(lhs));
    e->args.push_back(std::move(rhs));
    return e;
}

ExprPtr Expr::ternary(ExprPtr cond, ExprPtr then_e, ExprPtr else_e, SourcePos pos) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Ternary;
    e->pos = pos;
    e->args = {std::move(cond), std::move(then_e), std::move(else_e)};
    return e;
}

ExprPtr Expr::exactly_one_of(std::vector<ExprPtr> args, SourcePos pos) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::ExactlyOneOf;
    e->pos = pos;
    e->args = std::move(args);
    return e;
}

bool structurally_equal(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b) return !a && !b;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case ExprKind::IntLit: return a->int_value == b->int_value;
        case ExprKind::BoolLit: return a->bool_value == b->bool_value;
        case ExprKind::RatLit: return a->rat_value == b->rat_value;
        case ExprKind::Ident: return a->name == b->name;
        case ExprKind::Unary:
            if (a->un_op != b->un_op) return false;
            break;
        case ExprKind::Binary:
            if (a->bin_op != b->bin_op) return false;
            break;
        case ExprKind::Ternary:
        case ExprKind::ExactlyOneOf:
            break;
    }
    if (a->args.size() != b->args.size()) return false;
    for (std::size_t i = 0; i < a->args.size(); ++i) {
        if (!structurally_equal(a->args[i], b->args[i])) return false;
    }
    return true;
}

ExprPtr substitute(const ExprPtr& e, const std::vector<std::pair<std::string, std::string>>& renames) {
    if (!e) return e;
    if (e->kind == ExprKind::Ident) {
        for (const auto& [from, to] : renames) {
            if (e->name == from) return Expr::ident(to, e->pos);
        }
        return e;
    }
    if (e->args.empty()) return e;
    auto copy = std::make_shared<Expr>(*e);
    for (auto& arg : copy->args) arg = substitute(arg, renames);
    return copy;
}

namespace {

bool equal_updates(const std::vector<UpdateBranch>& a, const std::vector<UpdateBranch>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!structurally_equal(a[i].probability, b[i].probability)) return false;
        if (a[i].assignments.size() != b[i].assignments.size()) return false;
        for (std::size_t j = 0; j < a[i].assignments.size(); ++j) {
            if (a[i].assignments[j].variable != b[i].assignments[j].variable) return false;
            if (!structurally_equal(a[i].assignments[j].value, b[i].assignments[j].value)) return false;
        }
    }
    return true;
}

} // namespace

bool structurally_equal(const Program& a, const Program& b) {
    if (a.constants.size() != b.constants.size() || a.modules.size() != b.modules.size() ||
        a.labels.size() != b.labels.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.constants.size(); ++i) {
        const auto& ca = a.constants[i];
        const auto& cb = b.constants[i];
        if (ca.name != cb.name || ca.type != cb.type || !structurally_equal(ca.value, cb.value)) {
            return false;
        }
    }
    for (std::size_t i = 0; i < a.modules.size(); ++i) {
        const auto& ma = a.modules[i];
        const auto& mb = b.modules[i];
        if (ma.name != mb.name || ma.variables.size() != mb.variables.size() ||
            ma.commands.size() != mb.commands.size()) {
            return false;
        }
        for (std::size_t j = 0; j < ma.variables.size(); ++j) {
            const auto& va = ma.variables[j];
            const auto& vb = mb.variables[j];
            if (va.name != vb.name || va.is_bool != vb.is_bool ||
                !structurally_equal(va.low, vb.low) || !structurally_equal(va.high, vb.high) ||
                !structurally_equal(va.init, vb.init)) {
                return false;
            }
        }
        for (std::size_t j = 0; j < ma.commands.size(); ++j) {
            const auto& ca = ma.commands[j];
            const auto& cb = mb.commands[j];
            if (ca.action != cb.action || !structurally_equal(ca.guard, cb.guard) ||
                !equal_updates(ca.updates, cb.updates)) {
                return false;
            }
        }
    }
    for (std::size_t i = 0; i < a.labels.size(); ++i) {
        if (a.labels[i].name != b.labels[i].name ||
            !structurally_equal(a.labels[i].expr, b.labels[i].expr)) {
            return false;
        }
    }
    return structurally_equal(a.init_predicate, b.init_predicate);
}

} // namespace pmc::lang
