#pragma once

#include "pmc/errors.hpp"
#include "pmc/lang/ast.hpp"
#include "pmc/rational.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace pmc::lang {

enum class TokKind {
    Ident,
    Int,
    Decimal,
    String,
    // punctuation
    LBracket, RBracket, LParen, RParen,
    Semicolon, Colon, Comma, Prime, Question,
    Arrow, DotDot,
    Eq, Neq, Lt, Le, Gt, Ge,
    Plus, Minus, Star, Slash,
    Amp, Pipe, Bang,
    End,
};

struct Token {
    TokKind kind;
    std::string text;
    long long int_value = 0;
    Rational rat_value;
    SourcePos pos;
};

std::vector<Token> tokenize(std::string_view text, const std::string& filename);

} // namespace pmc::lang
