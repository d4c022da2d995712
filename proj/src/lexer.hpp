#pragma once

// Tokenizer shared by the Feather and TVL front ends. Keywords are not
// classified here; both grammars see plain words.

#include "feather/script.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace feather::detail {

enum class TokenKind { word, string, integer, real, punct, error, end };

struct Token {
    TokenKind kind = TokenKind::end;
    std::string text; ///< word, punctuation, string contents, numeral, or error message
    SourcePos pos;
    std::int64_t integer = 0;
    double real = 0.0;

    bool is(TokenKind k, std::string_view t) const { return kind == k && text == t; }
    bool is_word(std::string_view t) const { return is(TokenKind::word, t); }
    bool is_punct(std::string_view t) const { return is(TokenKind::punct, t); }
};

/// Splits `text` into tokens, always ending with an `end` token. Lexical
/// problems become `error` tokens carrying the message.
std::vector<Token> tokenize(std::string_view text, bool allow_braces);

std::string describe(const Token& t);

inline bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
inline bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

} // namespace feather::detail
