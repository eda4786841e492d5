#include "lexer.hpp"

#include <cctype>

namespace pmc::lang {

namespace {

[[noreturn]] void fail(const std::string& filename, int line, int col, const std::string& what) {
    throw Error(ErrorKind::SyntaxError,
                filename + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + what);
}

} // namespace

std::vector<Token> tokenize(std::string_view text, const std::string& filename) {
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto peek = [&](std::size_t off = 0) -> char {
        return i + off < text.size() ? text[i + off] : '\0';
    };
    auto advance = [&]() {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        ++i;
    };
    auto push = [&](TokKind kind, std::string s, SourcePos pos) {
        out.push_back({kind, std::move(s), 0, Rational(0), pos});
    };

    while (i < text.size()) {
        char c = peek();
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            advance();
            continue;
        }
        if (c == '/' && peek(1) == '/') {
            while (i < text.size() && text[i] != '\n') advance();
            continue;
        }
        SourcePos pos{line, col};
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string word;
            while (i < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) {
                word.push_back(peek());
                advance();
            }
            push(TokKind::Ident, std::move(word), pos);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::string num;
            bool decimal = false;
            while (i < text.size() && std::isdigit(static_cast<unsigned char>(peek()))) {
                num.push_back(peek());
                advance();
            }
            // a lone '.' is a decimal point; ".." is a range separator
            if (peek() == '.' && peek(1) != '.') {
                decimal = true;
                num.push_back('.');
                advance();
                if (!std::isdigit(static_cast<unsigned char>(peek()))) {
                    fail(filename, line, col, "expected digits after decimal point");
                }
                while (i < text.size() && std::isdigit(static_cast<unsigned char>(peek()))) {
                    num.push_back(peek());
                    advance();
                }
            }
            Token tok{decimal ? TokKind::Decimal : TokKind::Int, num, 0, Rational(0), pos};
            if (decimal) {
                auto r = Rational::parse(num);
                if (!r) fail(filename, pos.line, pos.col, "bad numeric literal '" + num + "'");
                tok.rat_value = *r;
            } else {
                try {
                    tok.int_value = std::stoll(num);
                } catch (const std::exception&) {
                    fail(filename, pos.line, pos.col, "integer literal '" + num + "' out of range");
                }
            }
            out.push_back(std::move(tok));
            continue;
        }
        if (c == '"') {
            advance();
            std::string s;
            while (i < text.size() && peek() != '"') {
                s.push_back(peek());
                advance();
            }
            if (i == text.size()) fail(filename, pos.line, pos.col, "unterminated string");
            advance();
            push(TokKind::String, std::move(s), pos);
            continue;
        }
        auto two = [&](char a, char b) { return c == a && peek(1) == b; };
        if (two('-', '>')) { advance(); advance(); push(TokKind::Arrow, "->", pos); continue; }
        if (two('.', '.')) { advance(); advance(); push(TokKind::DotDot, "..", pos); continue; }
        if (two('!', '=')) { advance(); advance(); push(TokKind::Neq, "!=", pos); continue; }
        if (two('<', '=')) { advance(); advance(); push(TokKind::Le, "<=", pos); continue; }
        if (two('>', '=')) { advance(); advance(); push(TokKind::Ge, ">=", pos); continue; }
        switch (c) {
            case '[': push(TokKind::LBracket, "[", pos); break;
            case ']': push(TokKind::RBracket, "]", pos); break;
            case '(': push(TokKind::LParen, "(", pos); break;
            case ')': push(TokKind::RParen, ")", pos); break;
            case ';': push(TokKind::Semicolon, ";", pos); break;
            case ':': push(TokKind::Colon, ":", pos); break;
            case ',': push(TokKind::Comma, ",", pos); break;
            case '\'': push(TokKind::Prime, "'", pos); break;
            case '?': push(TokKind::Question, "?", pos); break;
            case '=': push(TokKind::Eq, "=", pos); break;
            case '<': push(TokKind::Lt, "<", pos); break;
            case '>': push(TokKind::Gt, ">", pos); break;
            case '+': push(TokKind::Plus, "+", pos); break;
            case '-': push(TokKind::Minus, "-", pos); break;
            case '*': push(TokKind::Star, "*", pos); break;
            case '/': push(TokKind::Slash, "/", pos); break;
            case '&': push(TokKind::Amp, "&", pos); break;
            case '|': push(TokKind::Pipe, "|", pos); break;
            case '!': push(TokKind::Bang, "!", pos); break;
            default:
                fail(filename, pos.line, pos.col, std::string("unexpected character '") + c + "'");
        }
        advance();
    }
    out.push_back({TokKind::End, "", 0, Rational(0), {line, col}});
    return out;
}

} // namespace pmc::lang
