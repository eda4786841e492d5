#include "pmc/errors.hpp"
#include "pmc/lang/semantics.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace pmc::lang {

namespace {

[[noreturn]] void fail(ErrorKind kind, SourcePos pos, const std::string& what) {
    throw Error(kind, std::to_string(pos.line) + ":" + std::to_string(pos.col) + ": " + what);
}

long long require_int(const EvalValue& v, SourcePos pos, const char* what) {
    if (v.kind == EvalValue::Kind::Int) return v.i;
    if (v.kind == EvalValue::Kind::Rat && v.poly.is_constant()) {
        Rational r = v.poly.constant_value();
        if (r.is_integer()) return r.numerator().convert_to<long long>();
    }
    fail(ErrorKind::TypeError, pos, std::string(what) + " must be an integer");
}

// --- static types -----------------------------------------------------------

enum class StaticType { Bool, Int, Double };

struct TypeEnv {
    const std::map<std::string, std::size_t>* variables;
    const std::vector<StateVar>* var_decls;
    const std::map<std::string, EvalValue>* constants;
    const std::vector<std::string>* parameters;
};

StaticType join_numeric(StaticType a, StaticType b, SourcePos pos) {
    if (a == StaticType::Bool || b == StaticType::Bool) {
        fail(ErrorKind::TypeError, pos, "expected a numeric operand");
    }
    return (a == StaticType::Double || b == StaticType::Double) ? StaticType::Double
                                                                : StaticType::Int;
}

StaticType infer(const TypeEnv& env, const ExprPtr& e, bool allow_division) {
    switch (e->kind) {
        case ExprKind::IntLit: return StaticType::Int;
        case ExprKind::RatLit: return StaticType::Double;
        case ExprKind::BoolLit: return StaticType::Bool;
        case ExprKind::Ident: {
            auto vit = env.variables->find(e->name);
            if (vit != env.variables->end()) {
                return (*env.var_decls)[vit->second].is_bool ? StaticType::Bool : StaticType::Int;
            }
            auto cit = env.constants->find(e->name);
            if (cit != env.constants->end()) {
                switch (cit->second.kind) {
                    case EvalValue::Kind::Bool: return StaticType::Bool;
                    case EvalValue::Kind::Int: return StaticType::Int;
                    case EvalValue::Kind::Rat: return StaticType::Double;
                }
            }
            if (std::find(env.parameters->begin(), env.parameters->end(), e->name) !=
                env.parameters->end()) {
                return StaticType::Double;
            }
            fail(ErrorKind::UnknownVariable, e->pos, "unknown identifier '" + e->name + "'");
        }
        case ExprKind::Unary: {
            StaticType t = infer(env, e->args[0], allow_division);
            if (e->un_op == UnOp::Not) {
                if (t != StaticType::Bool) fail(ErrorKind::TypeError, e->pos, "'!' needs a boolean");
                return StaticType::Bool;
            }
            if (t == StaticType::Bool) fail(ErrorKind::TypeError, e->pos, "'-' needs a number");
            return t;
        }
        case ExprKind::Binary: {
            StaticType l = infer(env, e->args[0], allow_division);
            StaticType r = infer(env, e->args[1], allow_division);
            switch (e->bin_op) {
                case BinOp::Add:
                case BinOp::Sub:
                case BinOp::Mul:
                    return join_numeric(l, r, e->pos);
                case BinOp::Div:
                    if (!allow_division) {
                        fail(ErrorKind::TypeError, e->pos,
                             "division is only allowed in probability expressions");
                    }
                    join_numeric(l, r, e->pos);
                    return StaticType::Double;
                case BinOp::Eq:
                case BinOp::Ne:
                    if ((l == StaticType::Bool) != (r == StaticType::Bool)) {
                        fail(ErrorKind::TypeError, e->pos, "comparing boolean with number");
                    }
                    return StaticType::Bool;
                case BinOp::Lt:
                case BinOp::Le:
                case BinOp::Gt:
                case BinOp::Ge:
                    join_numeric(l, r, e->pos);
                    return StaticType::Bool;
                case BinOp::And:
                case BinOp::Or:
                    if (l != StaticType::Bool || r != StaticType::Bool) {
                        fail(ErrorKind::TypeError, e->pos, "boolean connective needs booleans");
                    }
                    return StaticType::Bool;
            }
            fail(ErrorKind::Internal, e->pos, "bad binary op");
        }
        case ExprKind::Ternary: {
            if (infer(env, e->args[0], allow_division) != StaticType::Bool) {
                fail(ErrorKind::TypeError, e->pos, "condition must be boolean");
            }
            StaticType l = infer(env, e->args[1], allow_division);
            StaticType r = infer(env, e->args[2], allow_division);
            if ((l == StaticType::Bool) != (r == StaticType::Bool)) {
                fail(ErrorKind::TypeError, e->pos, "mismatched conditional branches");
            }
            if (l == StaticType::Bool) return StaticType::Bool;
            return join_numeric(l, r, e->pos);
        }
        case ExprKind::ExactlyOneOf: {
            for (const auto& arg : e->args) {
                if (infer(env, arg, allow_division) != StaticType::Bool) {
                    fail(ErrorKind::TypeError, e->pos, "ExactlyOneOf needs boolean arguments");
                }
            }
            return StaticType::Bool;
        }
    }
    fail(ErrorKind::Internal, e->pos, "bad expression kind");
}

} // namespace

std::string ResolvedProgram::state_name(const StateValues& values) const {
    std::ostringstream os;
    for (std::size_t i = 0; i < variables.size(); ++i) {
        if (i) os << ",";
        os << variables[i].name << "=";
        if (variables[i].is_bool) {
            os << (values[i] ? "true" : "false");
        } else {
            os << values[i];
        }
    }
    return os.str();
}

EvalValue eval_expr(const ResolvedProgram& rp, const ExprPtr& e, const StateValues* state,
                    const Valuation* valuation) {
    auto rat_of = [&](const EvalValue& v, SourcePos pos) -> Polynomial {
        switch (v.kind) {
            case EvalValue::Kind::Int: return Polynomial(Rational(v.i));
            case EvalValue::Kind::Rat: return v.poly;
            case EvalValue::Kind::Bool:
                fail(ErrorKind::TypeError, pos, "expected a number, got a boolean");
        }
        fail(ErrorKind::Internal, pos, "bad value");
    };
    auto bool_of = [&](const EvalValue& v, SourcePos pos) -> bool {
        if (v.kind != EvalValue::Kind::Bool) {
            fail(ErrorKind::TypeError, pos, "expected a boolean");
        }
        return v.b;
    };
    auto constant_of = [&](const Polynomial& p, SourcePos pos) -> Rational {
        if (!p.is_constant()) {
            fail(ErrorKind::TypeError, pos, "parametric value where a constant is needed");
        }
        return p.constant_value();
    };

    switch (e->kind) {
        case ExprKind::IntLit: return EvalValue::integer(e->int_value);
        case ExprKind::RatLit: return EvalValue::rational(Polynomial(e->rat_value));
        case ExprKind::BoolLit: return EvalValue::boolean(e->bool_value);
        case ExprKind::Ident: {
            auto vit = rp.variable_index.find(e->name);
            if (vit != rp.variable_index.end()) {
                if (!state) {
                    fail(ErrorKind::TypeError, e->pos,
                         "state variable '" + e->name + "' in a stateless context");
                }
                const StateVar& var = rp.variables[vit->second];
                long long value = (*state)[vit->second];
                return var.is_bool ? EvalValue::boolean(value != 0) : EvalValue::integer(value);
            }
            auto cit = rp.constants.find(e->name);
            if (cit != rp.constants.end()) return cit->second;
            if (std::find(rp.parameters.begin(), rp.parameters.end(), e->name) !=
                rp.parameters.end()) {
                if (valuation && valuation->has(e->name)) {
                    return EvalValue::rational(Polynomial(valuation->at(e->name)));
                }
                return EvalValue::rational(Polynomial::variable(e->name));
            }
            fail(ErrorKind::UnknownVariable, e->pos, "unknown identifier '" + e->name + "'");
        }
        case ExprKind::Unary: {
            EvalValue v = eval_expr(rp, e->args[0], state, valuation);
            if (e->un_op == UnOp::Not) return EvalValue::boolean(!bool_of(v, e->pos));
            if (v.kind == EvalValue::Kind::Int) return EvalValue::integer(-v.i);
            return EvalValue::rational(-rat_of(v, e->pos));
        }
        case ExprKind::Binary: {
            if (e->bin_op == BinOp::And) {
                // short-circuit keeps unreachable operands unevaluated
                if (!bool_of(eval_expr(rp, e->args[0], state, valuation), e->pos)) {
                    return EvalValue::boolean(false);
                }
                return EvalValue::boolean(bool_of(eval_expr(rp, e->args[1], state, valuation), e->pos));
            }
            if (e->bin_op == BinOp::Or) {
                if (bool_of(eval_expr(rp, e->args[0], state, valuation), e->pos)) {
                    return EvalValue::boolean(true);
                }
                return EvalValue::boolean(bool_of(eval_expr(rp, e->args[1], state, valuation), e->pos));
            }
            EvalValue l = eval_expr(rp, e->args[0], state, valuation);
            EvalValue r = eval_expr(rp, e->args[1], state, valuation);
            switch (e->bin_op) {
                case BinOp::Add:
                case BinOp::Sub:
                case BinOp::Mul: {
                    if (l.kind == EvalValue::Kind::Int && r.kind == EvalValue::Kind::Int) {
                        long long a = l.i, b = r.i;
                        long long out = e->bin_op == BinOp::Add   ? a + b
                                        : e->bin_op == BinOp::Sub ? a - b
                                                                  : a * b;
                        return EvalValue::integer(out);
                    }
                    Polynomial a = rat_of(l, e->pos), b = rat_of(r, e->pos);
                    Polynomial out = e->bin_op == BinOp::Add   ? a + b
                                     : e->bin_op == BinOp::Sub ? a - b
                                                               : a * b;
                    return EvalValue::rational(std::move(out));
                }
                case BinOp::Div: {
                    Polynomial num = rat_of(l, e->pos);
                    Rational den = constant_of(rat_of(r, e->pos), e->pos);
                    if (den.is_zero()) {
                        fail(ErrorKind::DivisionByZero, e->pos, "division by zero");
                    }
                    return EvalValue::rational(num.scaled(Rational(1) / den));
                }
                case BinOp::Eq:
                case BinOp::Ne: {
                    bool equal;
                    if (l.kind == EvalValue::Kind::Bool || r.kind == EvalValue::Kind::Bool) {
                        equal = bool_of(l, e->pos) == bool_of(r, e->pos);
                    } else if (l.kind == EvalValue::Kind::Int && r.kind == EvalValue::Kind::Int) {
                        equal = l.i == r.i;
                    } else {
                        equal = constant_of(rat_of(l, e->pos), e->pos) ==
                                constant_of(rat_of(r, e->pos), e->pos);
                    }
                    return EvalValue::boolean(e->bin_op == BinOp::Eq ? equal : !equal);
                }
                case BinOp::Lt:
                case BinOp::Le:
                case BinOp::Gt:
                case BinOp::Ge: {
                    bool result;
                    if (l.kind == EvalValue::Kind::Int && r.kind == EvalValue::Kind::Int) {
                        result = e->bin_op == BinOp::Lt   ? l.i < r.i
                                 : e->bin_op == BinOp::Le ? l.i <= r.i
                                 : e->bin_op == BinOp::Gt ? l.i > r.i
                                                          : l.i >= r.i;
                    } else {
                        Rational a = constant_of(rat_of(l, e->pos), e->pos);
                        Rational b = constant_of(rat_of(r, e->pos), e->pos);
                        result = e->bin_op == BinOp::Lt   ? a < b
                                 : e->bin_op == BinOp::Le ? a <= b
                                 : e->bin_op == BinOp::Gt ? a > b
                                                          : a >= b;
                    }
                    return EvalValue::boolean(result);
                }
                default:
                    fail(ErrorKind::Internal, e->pos, "bad binary op");
            }
        }
        case ExprKind::Ternary: {
            bool cond = bool_of(eval_expr(rp, e->args[0], state, valuation), e->pos);
            return eval_expr(rp, e->args[cond ? 1 : 2], state, valuation);
        }
        case ExprKind::ExactlyOneOf: {
            int count = 0;
            for (const auto& arg : e->args) {
                if (bool_of(eval_expr(rp, arg, state, valuation), e->pos)) ++count;
            }
            return EvalValue::boolean(count == 1);
        }
    }
    fail(ErrorKind::Internal, e->pos, "bad expression kind");
}

ResolvedProgram resolve(const Program& program) {
    ResolvedProgram rp;

    // constants and parameters, in declaration order
    for (const auto& decl : program.constants) {
        if (rp.constants.count(decl.name) ||
            std::find(rp.parameters.begin(), rp.parameters.end(), decl.name) !=
                rp.parameters.end()) {
            fail(ErrorKind::SyntaxError, decl.pos, "duplicate constant '" + decl.name + "'");
        }
        if (!decl.value) {
            if (decl.type != ConstType::Double) {
                fail(ErrorKind::TypeError, decl.pos,
                     "only double constants may be left undefined (parameters)");
            }
            rp.parameters.push_back(decl.name);
            continue;
        }
        EvalValue value = eval_expr(rp, decl.value, nullptr);
        switch (decl.type) {
            case ConstType::Int:
                value = EvalValue::integer(require_int(value, decl.pos, "int constant"));
                break;
            case ConstType::Double:
                if (value.kind == EvalValue::Kind::Int) {
                    value = EvalValue::rational(Polynomial(Rational(value.i)));
                }
                if (value.kind != EvalValue::Kind::Rat || !value.poly.is_constant()) {
                    fail(ErrorKind::TypeError, decl.pos, "double constant must be a number");
                }
                break;
            case ConstType::Bool:
                if (value.kind != EvalValue::Kind::Bool) {
                    fail(ErrorKind::TypeError, decl.pos, "bool constant must be a boolean");
                }
                break;
        }
        rp.constants.emplace(decl.name, std::move(value));
    }

    if (program.modules.empty()) {
        throw Error(ErrorKind::SyntaxError, "model has no modules");
    }

    // variables, globally unique
    for (std::size_t mi = 0; mi < program.modules.size(); ++mi) {
        const Module& module = program.modules[mi];
        rp.module_names.push_back(module.name);
        for (const auto& decl : module.variables) {
            if (rp.variable_index.count(decl.name)) {
                fail(ErrorKind::SyntaxError, decl.pos, "duplicate variable '" + decl.name + "'");
            }
            if (rp.constants.count(decl.name) ||
                std::find(rp.parameters.begin(), rp.parameters.end(), decl.name) !=
                    rp.parameters.end()) {
                fail(ErrorKind::SyntaxError, decl.pos,
                     "variable '" + decl.name + "' shadows a constant");
            }
            StateVar var;
            var.name = decl.name;
            var.module_index = mi;
            if (decl.is_bool) {
                var.is_bool = true;
                var.low = 0;
                var.high = 1;
            } else {
                var.low = require_int(eval_expr(rp, decl.low, nullptr), decl.pos, "range bound");
                var.high = require_int(eval_expr(rp, decl.high, nullptr), decl.pos, "range bound");
                if (var.low > var.high) {
                    fail(ErrorKind::TypeError, decl.pos, "empty range for '" + decl.name + "'");
                }
            }
            if (decl.init) {
                EvalValue init = eval_expr(rp, decl.init, nullptr);
                if (var.is_bool) {
                    if (init.kind == EvalValue::Kind::Bool) {
                        var.init = init.b ? 1 : 0;
                    } else {
                        long long v = require_int(init, decl.pos, "init value");
                        if (v != 0 && v != 1) {
                            fail(ErrorKind::TypeError, decl.pos, "bool init must be 0/1");
                        }
                        var.init = v;
                    }
                } else {
                    var.init = require_int(init, decl.pos, "init value");
                }
            } else {
                var.init = var.low;
            }
            if (var.init < var.low || var.init > var.high) {
                fail(ErrorKind::OutOfDomain, decl.pos, "init value outside range");
            }
            rp.variable_index.emplace(var.name, rp.variables.size());
            rp.variables.push_back(var);
        }
    }

    TypeEnv env{&rp.variable_index, &rp.variables, &rp.constants, &rp.parameters};

    // commands
    for (std::size_t mi = 0; mi < program.modules.size(); ++mi) {
        const Module& module = program.modules[mi];
        for (std::size_t ci = 0; ci < module.commands.size(); ++ci) {
            const Command& cmd = module.commands[ci];
            if (infer(env, cmd.guard, false) != StaticType::Bool) {
                fail(ErrorKind::TypeError, cmd.pos, "guard must be boolean");
            }
            ResolvedCommand out;
            out.module_index = mi;
            out.index_in_module = ci;
            out.action = cmd.action;
            out.guard = cmd.guard;
            out.pos = cmd.pos;
            for (const auto& update : cmd.updates) {
                ResolvedUpdate ru;
                if (update.probability) {
                    StaticType t = infer(env, update.probability, true);
                    if (t == StaticType::Bool) {
                        fail(ErrorKind::TypeError, cmd.pos, "probability must be numeric");
                    }
                }
                ru.probability = update.probability;
                std::set<std::size_t> written;
                for (const auto& a : update.assignments) {
                    auto it = rp.variable_index.find(a.variable);
                    if (it == rp.variable_index.end()) {
                        fail(ErrorKind::UnknownVariable, a.pos,
                             "assignment to unknown variable '" + a.variable + "'");
                    }
                    if (!written.insert(it->second).second) {
                        fail(ErrorKind::DataRace, a.pos,
                             "variable '" + a.variable + "' assigned twice in one update");
                    }
                    ExprPtr value = a.value;
                    const StateVar& var = rp.variables[it->second];
                    if (var.is_bool && value->kind == ExprKind::IntLit &&
                        (value->int_value == 0 || value->int_value == 1)) {
                        value = Expr::bool_lit(value->int_value == 1, value->pos);
                    }
                    StaticType t = infer(env, value, false);
                    if (var.is_bool && t != StaticType::Bool) {
                        fail(ErrorKind::TypeError, a.pos, "assigning a number to bool variable");
                    }
                    if (!var.is_bool && t != StaticType::Int) {
                        fail(ErrorKind::TypeError, a.pos,
                             "assigning a non-integer to int variable");
                    }
                    ru.assignments.emplace_back(it->second, std::move(value));
                }
                out.updates.push_back(std::move(ru));
            }
            rp.commands.push_back(std::move(out));
        }
    }

    // scheduling units: named actions in first-appearance order, anonymous
    // commands as their own units
    std::vector<std::string> action_order;
    for (const auto& cmd : rp.commands) {
        if (cmd.action.empty()) continue;
        if (std::find(action_order.begin(), action_order.end(), cmd.action) == action_order.end()) {
            action_order.push_back(cmd.action);
        }
    }
    for (const auto& action : action_order) {
        ActionInfo info;
        info.display = action;
        for (std::size_t mi = 0; mi < program.modules.size(); ++mi) {
            std::vector<std::size_t> cmds;
            for (std::size_t k = 0; k < rp.commands.size(); ++k) {
                if (rp.commands[k].module_index == mi && rp.commands[k].action == action) {
                    cmds.push_back(k);
                }
            }
            if (!cmds.empty()) info.per_module.emplace_back(mi, std::move(cmds));
        }
        rp.actions.push_back(std::move(info));
    }
    for (std::size_t k = 0; k < rp.commands.size(); ++k) {
        if (!rp.commands[k].action.empty()) continue;
        ActionInfo info;
        info.display = "[]@" + rp.module_names[rp.commands[k].module_index] + "#" +
                       std::to_string(rp.commands[k].index_in_module);
        info.per_module.emplace_back(rp.commands[k].module_index, std::vector<std::size_t>{k});
        rp.actions.push_back(std::move(info));
    }

    // labels
    for (const auto& label : program.labels) {
        if (infer(env, label.expr, false) != StaticType::Bool) {
            fail(ErrorKind::TypeError, label.pos, "label must be boolean");
        }
        rp.labels.emplace(label.name, label.expr);
    }

    // initial state
    rp.initial.resize(rp.variables.size());
    for (std::size_t i = 0; i < rp.variables.size(); ++i) rp.initial[i] = rp.variables[i].init;
    if (program.init_predicate) {
        if (infer(env, program.init_predicate, false) != StaticType::Bool) {
            fail(ErrorKind::TypeError, program.init_predicate->pos, "init predicate must be boolean");
        }
        // enumerate the full domain; exactly one satisfying assignment allowed
        double combinations = 1;
        for (const auto& var : rp.variables) combinations *= static_cast<double>(var.domain_size());
        if (combinations > (1 << 22)) {
            throw Error(ErrorKind::StateCapExceeded, "init predicate domain too large to solve");
        }
        std::vector<StateValues> hits;
        StateValues probe(rp.variables.size());
        std::function<void(std::size_t)> walk = [&](std::size_t i) {
            if (hits.size() > 1) return;
            if (i == rp.variables.size()) {
                if (eval_expr(rp, program.init_predicate, &probe).b) hits.push_back(probe);
                return;
            }
            for (long long v = rp.variables[i].low; v <= rp.variables[i].high; ++v) {
                probe[i] = v;
                walk(i + 1);
            }
        };
        walk(0);
        if (hits.size() != 1) {
            throw Error(ErrorKind::NotWellDefined,
                        "init predicate must describe exactly one state, found " +
                            std::to_string(hits.size()));
        }
        rp.initial = hits.front();
    }

    rp.shared_bitwidth = 1;
    for (const auto& var : rp.variables) {
        unsigned bits = 1;
        while ((1ll << bits) < var.domain_size()) ++bits;
        rp.shared_bitwidth = std::max(rp.shared_bitwidth, bits);
    }
    return rp;
}

} // namespace pmc::lang
