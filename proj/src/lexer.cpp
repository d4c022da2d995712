#include "lexer.hpp"

#include <charconv>
#include <cmath>

namespace feather::detail {

namespace {

bool word_char(char c)
{
    return is_upper(c) || is_lower(c) || is_digit(c) || c == '_';
}

} // namespace

std::vector<Token> tokenize(std::string_view text, bool allow_braces)
{
    std::vector<Token> out;
    std::size_t i = 0;
    int line = 1;
    int col = 1;

    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n && i < text.size(); ++k, ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    auto error = [&](SourcePos pos, std::string msg) {
        Token t;
        t.kind = TokenKind::error;
        t.text = std::move(msg);
        t.pos = pos;
        out.push_back(std::move(t));
    };

    while (i < text.size()) {
        char c = text[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            advance(1);
            continue;
        }
        Token t;
        t.pos = {line, col};

        if (c == '"') {
            std::size_t j = i + 1;
            std::string body;
            bool bad = false;
            while (j < text.size() && text[j] != '"' && text[j] != '\n') {
                if (!bad && !is_string_literal_char(text[j])) {
                    bad = true;
                    error(t.pos, std::string("character '") + text[j] + "' is not allowed in a string literal");
                }
                body += text[j];
                ++j;
            }
            if (j >= text.size() || text[j] != '"') {
                if (!bad)
                    error(t.pos, "unterminated string literal");
                advance(j - i);
                continue;
            }
            advance(j + 1 - i);
            if (bad)
                continue;
            if (body.empty()) {
                error(t.pos, "string literal must not be empty");
                continue;
            }
            t.kind = TokenKind::string;
            t.text = std::move(body);
            out.push_back(std::move(t));
            continue;
        }

        if (is_digit(c)) {
            std::size_t j = i;
            while (j < text.size() && is_digit(text[j]))
                ++j;
            bool real = false;
            if (j < text.size() && text[j] == '.') {
                if (j + 1 < text.size() && is_digit(text[j + 1])) {
                    real = true;
                    j += 1;
                    while (j < text.size() && is_digit(text[j]))
                        ++j;
                } else {
                    error(t.pos, "a real literal needs digits after the decimal point");
                    advance(j + 1 - i);
                    continue;
                }
            }
            if (j < text.size() && word_char(text[j])) {
                std::size_t k = j;
                while (k < text.size() && word_char(text[k]))
                    ++k;
                error(t.pos, "malformed numeral '" + std::string(text.substr(i, k - i)) + "'");
                advance(k - i);
                continue;
            }
            std::string_view numeral = text.substr(i, j - i);
            t.text = std::string(numeral);
            if (real) {
                auto [p, ec] = std::from_chars(numeral.data(), numeral.data() + numeral.size(), t.real);
                if (ec != std::errc{} || !std::isfinite(t.real)) {
                    error(t.pos, "real literal '" + t.text + "' is out of range");
                    advance(j - i);
                    continue;
                }
                t.kind = TokenKind::real;
            } else {
                auto [p, ec] = std::from_chars(numeral.data(), numeral.data() + numeral.size(), t.integer);
                if (ec != std::errc{}) {
                    error(t.pos, "integer literal '" + t.text + "' is out of range");
                    advance(j - i);
                    continue;
                }
                t.kind = TokenKind::integer;
            }
            advance(j - i);
            out.push_back(std::move(t));
            continue;
        }

        if (word_char(c)) {
            std::size_t j = i;
            while (j < text.size() && word_char(text[j]))
                ++j;
            t.kind = TokenKind::word;
            t.text = std::string(text.substr(i, j - i));
            advance(j - i);
            out.push_back(std::move(t));
            continue;
        }

        std::string_view two = text.substr(i, 2);
        if (two == "<>" || two == "<=" || two == ">=") {
            t.kind = TokenKind::punct;
            t.text = std::string(two);
            advance(2);
            out.push_back(std::move(t));
            continue;
        }
        std::string_view singles = allow_braces ? "(),;.:=<>+-*/%{}" : "(),;.:=<>+-*/%";
        if (singles.find(c) != std::string_view::npos) {
            t.kind = TokenKind::punct;
            t.text = std::string(1, c);
            advance(1);
            out.push_back(std::move(t));
            continue;
        }
        if (static_cast<unsigned char>(c) < 0x20 || static_cast<unsigned char>(c) >= 0x7f)
            error(t.pos, "unexpected character (code " + std::to_string(static_cast<unsigned char>(c)) + ")");
        else
            error(t.pos, std::string("unexpected character '") + c + "'");
        advance(1);
    }
    Token end;
    end.kind = TokenKind::end;
    end.pos = {line, col};
    out.push_back(std::move(end));
    return out;
}

std::string describe(const Token& t)
{
    switch (t.kind) {
    case TokenKind::word: return "'" + t.text + "'";
    case TokenKind::string: return "\"" + t.text + "\"";
    case TokenKind::integer:
    case TokenKind::real: return "'" + t.text + "'";
    case TokenKind::punct: return "'" + t.text + "'";
    case TokenKind::error: return t.text;
    case TokenKind::end: return "end of input";
    }
    return "?";
}

} // namespace feather::detail
