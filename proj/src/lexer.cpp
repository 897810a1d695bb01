#include "lexer.hpp"

#include <array>
#include <cctype>
#include <charconv>

namespace bnforge {

namespace {

constexpr std::array kKeywords = {
    "along",    "bind",       "class",     "constraint", "cpt",          "define",
    "description","deterministic", "element", "evidence",    "exhaustive",
    "exogenous","extends",    "focus",     "fragment",   "generate",     "ident",
    "in",       "inequality", "input",     "instantiate","leak",         "model",
    "monotone", "nondecreasing", "nonincreasing", "noisyor", "ordered",   "outside",
    "partition","prior",      "rationale", "sampled",    "scenario",     "seed",
    "self",     "states",     "stub",      "template",   "use",          "var",
    "with",
};

} // namespace

bool is_keyword(std::string_view word) {
    for (const char* k : kKeywords)
        if (word == k) return true;
    return false;
}

bool is_bare_ident(std::string_view word) {
    if (word.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(word[0])) && word[0] != '_') return false;
    for (char c : word)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    return !is_keyword(word);
}

Lexer::Lexer(std::string_view src, std::string file) : src_(src), file_(std::move(file)) {}

void Lexer::advance() {
    if (pos_ >= src_.size()) return;
    if (src_[pos_] == '\n') {
        ++line_;
        col_ = 1;
    } else {
        ++col_;
    }
    ++pos_;
}

void Lexer::skip_ws_and_comments() {
    while (pos_ < src_.size()) {
        char c = src_[pos_];
        if (c == '#') {
            int at_line = line_;
            advance();
            std::size_t start = pos_;
            while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            std::string text(src_.substr(start, pos_ - start));
            if (!text.empty() && text.front() == ' ') text.erase(0, 1);
            comments_.push_back({at_line, std::move(text)});
        } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            advance();
        } else {
            break;
        }
    }
}

Token Lexer::next() {
    skip_ws_and_comments();
    Token t;
    t.span = {file_, line_, col_, 1};
    t.offset = pos_;
    if (pos_ >= src_.size()) {
        t.type = Tok::End;
        t.end_offset = pos_;
        return t;
    }

    char c = cur();
    auto single = [&](Tok type) {
        t.type = type;
        t.text = std::string(1, c);
        advance();
        t.end_offset = pos_;
        return t;
    };

    switch (c) {
        case '{': return single(Tok::LBrace);
        case '}': return single(Tok::RBrace);
        case '(': return single(Tok::LParen);
        case ')': return single(Tok::RParen);
        case ',': return single(Tok::Comma);
        case '=': return single(Tok::Equals);
        case ':': return single(Tok::Colon);
        case '.': return single(Tok::Dot);
        case '*': return single(Tok::Star);
        default: break;
    }

    if (c == '<') {
        advance();
        if (cur() == '=') {
            advance();
            t.type = Tok::LessEq;
            t.text = "<=";
            t.span.length = 2;
        } else {
            t.type = Tok::Less;
            t.text = "<";
        }
        t.end_offset = pos_;
        return t;
    }

    if (c == '-') {
        advance();
        if (cur() == '>') {
            advance();
            t.type = Tok::Arrow;
            t.text = "->";
            t.span.length = 2;
            t.end_offset = pos_;
            return t;
        }
        t.type = Tok::Bad;
        t.text = "-";
        t.end_offset = pos_;
        return t;
    }

    if (c == '"') {
        advance();
        std::string out;
        bool closed = false;
        while (pos_ < src_.size()) {
            char d = cur();
            if (d == '"') {
                advance();
                closed = true;
                break;
            }
            if (d == '\n') break; // strings do not span lines
            if (d == '\\') {
                advance();
                char e = cur();
                switch (e) {
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    default: out += e; break;
                }
                advance();
            } else {
                out += d;
                advance();
            }
        }
        t.type = closed ? Tok::String : Tok::Bad;
        t.text = std::move(out);
        t.span.length = static_cast<int>(pos_ - t.offset);
        t.end_offset = pos_;
        if (!closed) t.text = "unterminated string";
        return t;
    }

    if (std::isdigit(static_cast<unsigned char>(c))) {
        std::size_t start = pos_;
        while (std::isdigit(static_cast<unsigned char>(cur()))) advance();
        if (cur() == '.' && pos_ + 1 < src_.size() &&
            std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
            advance();
            while (std::isdigit(static_cast<unsigned char>(cur()))) advance();
        }
        if (cur() == 'e' || cur() == 'E') {
            std::size_t mark = pos_;
            advance();
            if (cur() == '+' || cur() == '-') advance();
            if (std::isdigit(static_cast<unsigned char>(cur()))) {
                while (std::isdigit(static_cast<unsigned char>(cur()))) advance();
            } else {
                // not an exponent after all; rewind is safe because we only
                // consumed 'e' and maybe a sign on this line
                col_ -= static_cast<int>(pos_ - mark);
                pos_ = mark;
            }
        }
        t.text = std::string(src_.substr(start, pos_ - start));
        std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.num);
        t.type = Tok::Number;
        t.span.length = static_cast<int>(pos_ - start);
        t.end_offset = pos_;
        return t;
    }

    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t start = pos_;
        while (std::isalnum(static_cast<unsigned char>(cur())) || cur() == '_') advance();
        t.type = Tok::Ident;
        t.text = std::string(src_.substr(start, pos_ - start));
        t.span.length = static_cast<int>(pos_ - start);
        t.end_offset = pos_;
        return t;
    }

    t.type = Tok::Bad;
    t.text = std::string(1, c);
    advance();
    t.end_offset = pos_;
    return t;
}

std::string Lexer::capture_braced_body(bool& ok) {
    std::size_t start = pos_;
    int depth = 1;
    while (pos_ < src_.size()) {
        char c = cur();
        if (c == '"') {
            advance();
            while (pos_ < src_.size() && cur() != '"' && cur() != '\n') {
                if (cur() == '\\') advance();
                advance();
            }
            if (cur() == '"') advance();
            continue;
        }
        if (c == '#') {
            while (pos_ < src_.size() && cur() != '\n') advance();
            continue;
        }
        if (c == '{') ++depth;
        if (c == '}') {
            --depth;
            if (depth == 0) {
                std::string body(src_.substr(start, pos_ - start));
                advance(); // consume '}'
                ok = true;
                return body;
            }
        }
        advance();
    }
    ok = false;
    return std::string(src_.substr(start));
}

} // namespace bnforge
