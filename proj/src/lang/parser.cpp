#include "pmc/lang/parser.hpp"

#include "lexer.hpp"
#include "pmc/errors.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace pmc::lang {

namespace {

class Parser {
public:
    Parser(std::string_view text, std::string filename)
        : filename_(std::move(filename)), tokens_(tokenize(text, filename_)) {}

    Program run() {
        if (at_ident("dtmc") || at_ident("probabilistic")) next();
        if (at_ident("mdp") || at_ident("ctmc") || at_ident("pta") || at_ident("nondeterministic")) {
            fail("only dtmc models are supported");
        }
        Program program;
        while (!at(TokKind::End)) {
            if (at_ident("const")) {
                parse_const(program);
            } else if (at_ident("module")) {
                parse_module(program);
            } else if (at_ident("label")) {
                parse_label(program);
            } else if (at_ident("init")) {
                parse_init_block(program);
            } else if (at_ident("formula") || at_ident("rewards") || at_ident("system")) {
                fail("'" + cur().text + "' blocks are not supported");
            } else {
                fail("expected const, module, label or init declaration");
            }
        }
        return program;
    }

private:
    [[noreturn]] void fail(const std::string& what) const { fail_at(cur().pos, what); }

    [[noreturn]] void fail_at(SourcePos pos, const std::string& what) const {
        throw Error(ErrorKind::SyntaxError, filename_ + ":" + std::to_string(pos.line) + ":" +
                                                std::to_string(pos.col) + ": " + what);
    }

    const Token& cur() const { return tokens_[index_]; }
    const Token& peek(std::size_t off = 1) const {
        return tokens_[std::min(index_ + off, tokens_.size() - 1)];
    }
    void next() { if (index_ + 1 < tokens_.size()) ++index_; }

    bool at(TokKind k) const { return cur().kind == k; }
    bool at_ident(std::string_view word) const {
        return cur().kind == TokKind::Ident && cur().text == word;
    }

    void expect(TokKind k, const std::string& what) {
        if (!at(k)) fail("expected " + what);
        next();
    }

    std::string expect_name() {
        if (!at(TokKind::Ident)) fail("expected identifier");
        std::string name = cur().text;
        next();
        return name;
    }

    void expect_keyword(std::string_view word) {
        if (!at_ident(word)) fail("expected '" + std::string(word) + "'");
        next();
    }

    // --- declarations ----------------------------------------------------

    void parse_const(Program& program) {
        SourcePos pos = cur().pos;
        expect_keyword("const");
        ConstType type = ConstType::Int;
        if (at_ident("int")) {
            next();
        } else if (at_ident("double")) {
            type = ConstType::Double;
            next();
        } else if (at_ident("bool")) {
            type = ConstType::Bool;
            next();
        }
        while (true) {
            ConstantDecl decl;
            decl.pos = pos;
            decl.type = type;
            decl.name = expect_name();
            if (at(TokKind::Eq)) {
                next();
                decl.value = parse_expr();
            }
            program.constants.push_back(std::move(decl));
            if (at(TokKind::Comma)) {
                next();
                continue;
            }
            break;
        }
        expect(TokKind::Semicolon, "';' after constant declaration");
    }

    void parse_module(Program& program) {
        SourcePos pos = cur().pos;
        expect_keyword("module");
        Module module;
        module.pos = pos;
        module.name = expect_name();
        if (at(TokKind::Eq)) {
            next();
            std::string source = expect_name();
            expect(TokKind::LBracket, "'[' in module renaming");
            std::vector<std::pair<std::string, std::string>> renames;
            while (!at(TokKind::RBracket)) {
                std::string from = expect_name();
                expect(TokKind::Eq, "'=' in renaming");
                std::string to = expect_name();
                renames.emplace_back(std::move(from), std::move(to));
                if (at(TokKind::Comma)) next();
            }
            expect(TokKind::RBracket, "']' after renaming");
            if (at_ident("endmodule")) next();
            program.modules.push_back(expand_renaming(program, module.name, source, renames, pos));
            return;
        }
        while (!at_ident("endmodule")) {
            if (at(TokKind::End)) fail("missing 'endmodule'");
            if (at(TokKind::LBracket)) {
                module.commands.push_back(parse_command());
            } else if (at_ident("const")) {
                // some listings declare constants inside the module body;
                // they are global either way
                parse_const(program);
            } else {
                module.variables.push_back(parse_variable());
            }
        }
        next(); // endmodule
        if (module.commands.empty()) {
            fail_at(pos, "module '" + module.name + "' has no commands");
        }
        program.modules.push_back(std::move(module));
    }

    Module expand_renaming(const Program& program, const std::string& name,
                           const std::string& source,
                           const std::vector<std::pair<std::string, std::string>>& renames,
                           SourcePos pos) {
        const Module* base = nullptr;
        for (const auto& m : program.modules) {
            if (m.name == source) base = &m;
        }
        if (!base) fail_at(pos, "renaming of undeclared module '" + source + "'");
        std::set<std::string> known;
        for (const auto& v : base->variables) known.insert(v.name);
        for (const auto& c : program.constants) known.insert(c.name);
        for (const auto& [from, to] : renames) {
            if (!known.count(from)) {
                fail_at(pos, "renaming of undeclared symbol '" + from + "'");
            }
        }
        for (const auto& v : base->variables) {
            bool renamed = false;
            for (const auto& [from, to] : renames) renamed = renamed || from == v.name;
            if (!renamed) {
                fail_at(pos, "variable '" + v.name + "' of module '" + source +
                                 "' is not renamed; it would collide");
            }
        }
        Module out;
        out.pos = pos;
        out.name = name;
        out.renamed_from = source;
        out.renaming = renames;
        auto rename_ident = [&](const std::string& ident) {
            for (const auto& [from, to] : renames) {
                if (ident == from) return to;
            }
            return ident;
        };
        for (const auto& v : base->variables) {
            VariableDecl decl = v;
            decl.name = rename_ident(v.name);
            decl.low = substitute(v.low, renames);
            decl.high = substitute(v.high, renames);
            decl.init = substitute(v.init, renames);
            out.variables.push_back(std::move(decl));
        }
        for (const auto& c : base->commands) {
            Command cmd;
            cmd.pos = c.pos;
            cmd.action = c.action; // action names are shared, not renamed
            cmd.guard = substitute(c.guard, renames);
            for (const auto& u : c.updates) {
                UpdateBranch branch;
                branch.probability = substitute(u.probability, renames);
                for (const auto& a : u.assignments) {
                    branch.assignments.push_back(
                        {rename_ident(a.variable), substitute(a.value, renames), a.pos});
                }
                cmd.updates.push_back(std::move(branch));
            }
            out.commands.push_back(std::move(cmd));
        }
        return out;
    }

    VariableDecl parse_variable() {
        VariableDecl decl;
        decl.pos = cur().pos;
        decl.name = expect_name();
        expect(TokKind::Colon, "':' in variable declaration");
        if (at_ident("bool")) {
            next();
            decl.is_bool = true;
        } else {
            expect(TokKind::LBracket, "'[' or 'bool' in variable declaration");
            decl.low = parse_expr();
            expect(TokKind::DotDot, "'..' in range");
            decl.high = parse_expr();
            expect(TokKind::RBracket, "']' after range");
        }
        if (at_ident("init")) {
            next();
            decl.init = parse_expr();
        }
        expect(TokKind::Semicolon, "';' after variable declaration");
        return decl;
    }

    Command parse_command() {
        Command cmd;
        cmd.pos = cur().pos;
        expect(TokKind::LBracket, "'['");
        if (at(TokKind::Ident)) {
            cmd.action = expect_name();
        }
        expect(TokKind::RBracket, "']' after action");
        cmd.guard = parse_expr();
        expect(TokKind::Arrow, "'->' after guard");
        cmd.updates.push_back(parse_update_branch());
        while (at(TokKind::Plus)) {
            next();
            cmd.updates.push_back(parse_update_branch());
        }
        expect(TokKind::Semicolon, "';' after command");
        return cmd;
    }

    bool at_assignment_start() const {
        if (at(TokKind::LParen)) {
            return peek().kind == TokKind::Ident && peek(2).kind == TokKind::Prime;
        }
        return at(TokKind::Ident) && peek().kind == TokKind::Prime;
    }

    UpdateBranch parse_update_branch() {
        UpdateBranch branch;
        if (!at_assignment_start()) {
            branch.probability = parse_expr();
            expect(TokKind::Colon, "':' after update probability");
        }
        branch.assignments.push_back(parse_assignment());
        while (at(TokKind::Amp)) {
            next();
            branch.assignments.push_back(parse_assignment());
        }
        return branch;
    }

    Assignment parse_assignment() {
        Assignment a;
        a.pos = cur().pos;
        if (at(TokKind::LParen)) {
            next();
            a.variable = expect_name();
            expect(TokKind::Prime, "''' after variable");
            expect(TokKind::Eq, "'=' in assignment");
            a.value = parse_expr();
            expect(TokKind::RParen, "')' after assignment");
        } else {
            a.variable = expect_name();
            expect(TokKind::Prime, "''' after variable");
            expect(TokKind::Eq, "'=' in assignment");
            // bare assignments bind tighter than '&' so that
            // "x'=y & y'=x" splits into two assignments
            a.value = parse_bare_update_expr();
        }
        return a;
    }

    // In "p:x'=1 + 1-p:y'=y+1;" the first '+' separates branches while the
    // one in "y'=y+1" is arithmetic: a '+' starts a new branch iff a
    // top-level ':' or an assignment head follows before the ';'.
    bool plus_starts_new_branch() const {
        std::size_t i = index_ + 1;
        if (i < tokens_.size()) {
            if (tokens_[i].kind == TokKind::Ident && peek_kind(i + 1) == TokKind::Prime) return true;
            if (tokens_[i].kind == TokKind::LParen && peek_kind(i + 1) == TokKind::Ident &&
                peek_kind(i + 2) == TokKind::Prime) {
                return true;
            }
        }
        int depth = 0;
        for (; i < tokens_.size(); ++i) {
            switch (tokens_[i].kind) {
                case TokKind::LParen: ++depth; break;
                case TokKind::RParen: --depth; break;
                case TokKind::Colon:
                    if (depth == 0) return true;
                    break;
                case TokKind::Semicolon:
                case TokKind::End:
                    return false;
                default: break;
            }
        }
        return false;
    }

    TokKind peek_kind(std::size_t i) const {
        return i < tokens_.size() ? tokens_[i].kind : TokKind::End;
    }

    ExprPtr parse_bare_update_expr() {
        ExprPtr lhs = parse_mul();
        while (at(TokKind::Plus) || at(TokKind::Minus)) {
            if (at(TokKind::Plus) && plus_starts_new_branch()) break;
            BinOp op = at(TokKind::Plus) ? BinOp::Add : BinOp::Sub;
            SourcePos pos = cur().pos;
            next();
            lhs = Expr::binary(op, std::move(lhs), parse_mul(), pos);
        }
        return lhs;
    }

    void parse_label(Program& program) {
        LabelDecl decl;
        decl.pos = cur().pos;
        expect_keyword("label");
        if (!at(TokKind::String)) fail("expected label name string");
        decl.name = cur().text;
        next();
        expect(TokKind::Eq, "'=' after label name");
        decl.expr = parse_expr();
        expect(TokKind::Semicolon, "';' after label");
        for (const auto& l : program.labels) {
            if (l.name == decl.name) fail_at(decl.pos, "duplicate label \"" + decl.name + "\"");
        }
        program.labels.push_back(std::move(decl));
    }

    void parse_init_block(Program& program) {
        SourcePos pos = cur().pos;
        expect_keyword("init");
        if (program.init_predicate) fail_at(pos, "duplicate init block");
        program.init_predicate = parse_expr();
        expect_keyword("endinit");
    }

    // --- expressions ------------------------------------------------------

    ExprPtr parse_expr() { return parse_ternary(); }

    ExprPtr parse_ternary() {
        ExprPtr cond = parse_or();
        if (!at(TokKind::Question)) return cond;
        SourcePos pos = cur().pos;
        next();
        ExprPtr then_e = parse_ternary();
        expect(TokKind::Colon, "':' in conditional expression");
        ExprPtr else_e = parse_ternary();
        return Expr::ternary(std::move(cond), std::move(then_e), std::move(else_e), pos);
    }

    ExprPtr parse_or() {
        ExprPtr lhs = parse_and();
        while (at(TokKind::Pipe)) {
            SourcePos pos = cur().pos;
            next();
            lhs = Expr::binary(BinOp::Or, std::move(lhs), parse_and(), pos);
        }
        return lhs;
    }

    ExprPtr parse_and() {
        ExprPtr lhs = parse_not();
        while (at(TokKind::Amp)) {
            SourcePos pos = cur().pos;
            next();
            lhs = Expr::binary(BinOp::And, std::move(lhs), parse_not(), pos);
        }
        return lhs;
    }

    ExprPtr parse_not() {
        if (at(TokKind::Bang)) {
            SourcePos pos = cur().pos;
            next();
            return Expr::unary(UnOp::Not, parse_not(), pos);
        }
        return parse_rel();
    }

    ExprPtr parse_rel() {
        ExprPtr lhs = parse_add();
        BinOp op;
        switch (cur().kind) {
            case TokKind::Eq: op = BinOp::Eq; break;
            case TokKind::Neq: op = BinOp::Ne; break;
            case TokKind::Lt: op = BinOp::Lt; break;
            case TokKind::Le: op = BinOp::Le; break;
            case TokKind::Gt: op = BinOp::Gt; break;
            case TokKind::Ge: op = BinOp::Ge; break;
            default: return lhs;
        }
        SourcePos pos = cur().pos;
        next();
        return Expr::binary(op, std::move(lhs), parse_add(), pos);
    }

    ExprPtr parse_add() {
        ExprPtr lhs = parse_mul();
        while (at(TokKind::Plus) || at(TokKind::Minus)) {
            BinOp op = at(TokKind::Plus) ? BinOp::Add : BinOp::Sub;
            SourcePos pos = cur().pos;
            next();
            lhs = Expr::binary(op, std::move(lhs), parse_mul(), pos);
        }
        return lhs;
    }

    ExprPtr parse_mul() {
        ExprPtr lhs = parse_unary();
        while (at(TokKind::Star) || at(TokKind::Slash)) {
            BinOp op = at(TokKind::Star) ? BinOp::Mul : BinOp::Div;
            SourcePos pos = cur().pos;
            next();
            lhs = Expr::binary(op, std::move(lhs), parse_unary(), pos);
        }
        return lhs;
    }

    ExprPtr parse_unary() {
        if (at(TokKind::Minus)) {
            SourcePos pos = cur().pos;
            next();
            return Expr::unary(UnOp::Neg, parse_unary(), pos);
        }
        if (at(TokKind::Bang)) {
            SourcePos pos = cur().pos;
            next();
            return Expr::unary(UnOp::Not, parse_unary(), pos);
        }
        return parse_primary();
    }

    ExprPtr parse_primary() {
        SourcePos pos = cur().pos;
        if (at(TokKind::LParen)) {
            next();
            ExprPtr e = parse_expr();
            expect(TokKind::RParen, "')'");
            return e;
        }
        if (at(TokKind::Int)) {
            long long v = cur().int_value;
            next();
            return Expr::int_lit(v, pos);
        }
        if (at(TokKind::Decimal)) {
            Rational v = cur().rat_value;
            next();
            return Expr::rat_lit(std::move(v), pos);
        }
        if (at_ident("true")) {
            next();
            return Expr::bool_lit(true, pos);
        }
        if (at_ident("false")) {
            next();
            return Expr::bool_lit(false, pos);
        }
        if (at_ident("ExactlyOneOf")) {
            next();
            expect(TokKind::LParen, "'(' after ExactlyOneOf");
            std::vector<ExprPtr> args;
            if (!at(TokKind::RParen)) {
                args.push_back(parse_expr());
                while (at(TokKind::Comma)) {
                    next();
                    args.push_back(parse_expr());
                }
            }
            expect(TokKind::RParen, "')' after ExactlyOneOf arguments");
            if (args.empty()) fail_at(pos, "ExactlyOneOf needs at least one argument");
            return Expr::exactly_one_of(std::move(args), pos);
        }
        if (at(TokKind::Ident)) {
            std::string name = cur().text;
            next();
            return Expr::ident(std::move(name), pos);
        }
        fail("expected expression");
    }

    std::string filename_;
    std::vector<Token> tokens_;
    std::size_t index_ = 0;
};

} // namespace

Program parse(std::string_view text, const std::string& filename) {
    Parser parser(text, filename);
    return parser.run();
}

Program parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::SyntaxError, "cannot open model file '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str(), path);
}

} // namespace pmc::lang
