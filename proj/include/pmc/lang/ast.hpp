#pragma once

#include "pmc/rational.hpp"

#include <memory>
#include <string>
#include <vector>

namespace pmc::lang {

struct SourcePos {
    int line = 0;
    int col = 0;
};

enum class ExprKind {
    IntLit,
    BoolLit,
    RatLit,
    Ident,
    Unary,
    Binary,
    Ternary,
    ExactlyOneOf,
};

enum class UnOp { Not, Neg };
enum class BinOp { Add, Sub, Mul, Div, Eq, Ne, Lt, Le, Gt, Ge, And, Or };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    ExprKind kind;
    SourcePos pos;

    long long int_value = 0;
    bool bool_value = false;
    Rational rat_value;
    std::string name;
    UnOp un_op = UnOp::Not;
    BinOp bin_op = BinOp::Add;
    std::vector<ExprPtr> args;

    static ExprPtr int_lit(long long v, SourcePos pos = {});
    static ExprPtr bool_lit(bool v, SourcePos pos = {});
    static ExprPtr rat_lit(Rational v, SourcePos pos = {});
    static ExprPtr ident(std::string name, SourcePos pos = {});
    static ExprPtr unary(UnOp op, ExprPtr arg, SourcePos pos = {});
    static ExprPtr binary(BinOp op, ExprPtr lhs, ExprPtr rhs, SourcePos pos = {});
    static ExprPtr ternary(ExprPtr cond, ExprPtr then_e, ExprPtr else_e, SourcePos pos = {});
    static ExprPtr exactly_one_of(std::vector<ExprPtr> args, SourcePos pos = {});
};

bool structurally_equal(const ExprPtr& a, const ExprPtr& b);

// Substitutes identifiers per map (declaration sites included by the caller).
ExprPtr substitute(const ExprPtr& e, const std::vector<std::pair<std::string, std::string>>& renames);

struct Assignment {
    std::string variable; // unprimed name; the parser strips the '
    ExprPtr value;
    SourcePos pos;
};

struct UpdateBranch {
    ExprPtr probability; // null means an implicit probability of 1
    std::vector<Assignment> assignments;
};

struct Command {
    std::string action; // empty = anonymous
    ExprPtr guard;
    std::vector<UpdateBranch> updates;
    SourcePos pos;
};

struct VariableDecl {
    std::string name;
    bool is_bool = false;
    ExprPtr low;  // null for bool
    ExprPtr high; // null for bool
    ExprPtr init; // may be null (defaults to the lower bound / false)
    SourcePos pos;
};

struct Module {
    std::string name;
    std::vector<VariableDecl> variables;
    std::vector<Command> commands;
    // set when the module came from a renaming
    std::string renamed_from;
    std::vector<std::pair<std::string, std::string>> renaming;
    SourcePos pos;
};

enum class ConstType { Int, Double, Bool };

struct ConstantDecl {
    std::string name;
    ConstType type = ConstType::Double;
    ExprPtr value; // null = undefined value: a parameter
    SourcePos pos;
};

struct LabelDecl {
    std::string name;
    ExprPtr expr;
    SourcePos pos;
};

struct Program {
    std::vector<ConstantDecl> constants;
    std::vector<Module> modules;
    std::vector<LabelDecl> labels;
    ExprPtr init_predicate; // from an init...endinit block, may be null
};

bool structurally_equal(const Program& a, const Program& b);

} // namespace pmc::lang
