#pragma once

#include <algorithm>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "celds/errors.hpp"

namespace celds::detail {

enum class TokenKind { Ident, Number, String, Punct, End };

struct Token {
    TokenKind kind = TokenKind::End;
    std::string text;
    int line = 1;
};

/// Identifiers (letters, digits, `_`, leading `$`), numbers, double-quoted strings and operators.
/// `//` starts a comment running to the end of the line.
inline std::vector<Token> tokenize(std::string_view src, int first_line = 1)
{
    std::vector<Token> out;
    int line = first_line;
    std::size_t i = 0;
    auto ident_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
    while (i < src.size()) {
        const char c = src[i];
        if (c == '\n') {
            ++line;
            ++i;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
            while (i < src.size() && src[i] != '\n')
                ++i;
        } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$') {
            std::size_t j = i + 1;
            while (j < src.size() && ident_char(src[j]))
                ++j;
            out.push_back({TokenKind::Ident, std::string(src.substr(i, j - i)), line});
            i = j;
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < src.size() && (std::isdigit(static_cast<unsigned char>(src[j])) || src[j] == '.'))
                ++j;
            out.push_back({TokenKind::Number, std::string(src.substr(i, j - i)), line});
            i = j;
        } else if (c == '"') {
            std::size_t j = i + 1;
            while (j < src.size() && src[j] != '"' && src[j] != '\n')
                ++j;
            if (j >= src.size() || src[j] != '"')
                throw ParseError("unterminated string", line);
            out.push_back({TokenKind::String, std::string(src.substr(i + 1, j - i - 1)), line});
            i = j + 1;
        } else {
            static const char* two[] = {":=", "!=", "<=", ">="};
            std::string op(1, c);
            for (const char* t : two)
                if (src.substr(i, 2) == t)
                    op = t;
            if (op.size() == 1 && std::string_view("=<>()[],;+-").find(c) == std::string_view::npos)
                throw ParseError("unexpected character '" + op + "'", line);
            out.push_back({TokenKind::Punct, op, line});
            i += op.size();
        }
    }
    out.push_back({TokenKind::End, "", line});
    return out;
}

class TokenStream {
public:
    explicit TokenStream(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    const Token& peek(std::size_t ahead = 0) const
    {
        return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
    }
    const Token& next() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }
    bool at_end() const { return peek().kind == TokenKind::End; }

    bool accept(std::string_view punct_or_word)
    {
        const Token& t = peek();
        if ((t.kind == TokenKind::Punct || t.kind == TokenKind::Ident) && t.text == punct_or_word) {
            next();
            return true;
        }
        return false;
    }

    const Token& expect(std::string_view text)
    {
        if (!accept(text))
            fail("expected '" + std::string(text) + "'");
        return tokens_[pos_ - 1];
    }

    const Token& expect(TokenKind kind, std::string_view what)
    {
        if (peek().kind != kind)
            fail("expected " + std::string(what));
        return next();
    }

    [[noreturn]] void fail(const std::string& message) const
    {
        const Token& t = peek();
        throw ParseError(message + (t.kind == TokenKind::End ? " at end of input" : ", found '" + t.text + "'"),
                         t.line);
    }

private:
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

} // namespace celds::detail
