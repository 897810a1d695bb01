#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "bnforge/kb.hpp"

namespace bnforge {

enum class Tok {
    Ident,   // bare identifier or keyword
    String,  // decoded "..." literal
    Number,  // raw text in `text`, value in `num`
    LBrace, RBrace, LParen, RParen,
    Comma, Arrow, Equals, Colon, Dot, Star, Less, LessEq,
    End,
    Bad,
};

struct Token {
    Tok type = Tok::End;
    std::string text;   // identifier text / decoded string / raw number
    double num = 0.0;
    SourceSpan span;
    std::size_t offset = 0;     // byte offset of first char
    std::size_t end_offset = 0; // one past last char
};

struct CommentLine {
    int line = 0;
    std::string text; // without the leading '#'
};

bool is_keyword(std::string_view word);
bool is_bare_ident(std::string_view word);

/// On-demand tokenizer. Comments are collected separately so the parser can
/// attach them to declarations.
class Lexer {
public:
    Lexer(std::string_view src, std::string file);

    Token next();

    /// Captures raw text from the current position up to the brace matching
    /// an already-consumed '{', respecting strings and comments. Leaves the
    /// lexer positioned after the closing brace.
    std::string capture_braced_body(bool& ok);

    const std::vector<CommentLine>& comments() const { return comments_; }
    const std::string& file() const { return file_; }

private:
    void skip_ws_and_comments();
    char cur() const { return pos_ < src_.size() ? src_[pos_] : '\0'; }
    void advance();

    std::string_view src_;
    std::string file_;
    std::size_t pos_ = 0;
    int line_ = 1, col_ = 1;
    std::vector<CommentLine> comments_;
};

} // namespace bnforge
