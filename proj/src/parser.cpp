#include <algorithm>
#include <charconv>
#include <functional>
#include <set>

#include "bnforge/errors.hpp"
#include "bnforge/kb.hpp"
#include "lexer.hpp"

namespace bnforge {

std::vector<const InputDecl*> FragmentDecl::inputs() const {
    std::vector<const InputDecl*> out;
    for (const auto& item : items)
        if (const auto* in = std::get_if<InputDecl>(&item)) out.push_back(in);
    return out;
}

std::vector<const VarDecl*> FragmentDecl::vars() const {
    std::vector<const VarDecl*> out;
    for (const auto& item : items)
        if (const auto* v = std::get_if<VarDecl>(&item)) out.push_back(v);
    return out;
}

const InputDecl* FragmentDecl::find_input(const std::string& n) const {
    for (const auto& item : items)
        if (const auto* in = std::get_if<InputDecl>(&item))
            if (in->name == n) return in;
    return nullptr;
}

const VarDecl* FragmentDecl::find_var(const std::string& n) const {
    for (const auto& item : items)
        if (const auto* v = std::get_if<VarDecl>(&item))
            if (v->name == n) return v;
    return nullptr;
}

const FragmentDecl* KnowledgeBase::find_fragment(const std::string& n) const {
    for (const auto& f : fragments)
        if (f.name == n) return &f;
    return nullptr;
}
const ClassDecl* KnowledgeBase::find_class(const std::string& n) const {
    for (const auto& c : classes)
        if (c.name == n) return &c;
    return nullptr;
}
const TemplateDecl* KnowledgeBase::find_template(const std::string& n) const {
    for (const auto& t : templates)
        if (t.name == n) return &t;
    return nullptr;
}
const DefineDecl* KnowledgeBase::find_definition(const std::string& n) const {
    for (const auto& d : definitions)
        if (d.name == n) return &d;
    return nullptr;
}
const ScenarioDecl* KnowledgeBase::find_scenario(const std::string& n) const {
    for (const auto& s : scenarios)
        if (s.name == n) return &s;
    return nullptr;
}

namespace {

class Parser {
public:
    Parser(std::string_view text, const std::string& file) : lex_(text, file) { tok_ = lex_.next(); }

    ParseResult run() {
        while (tok_.type != Tok::End) {
            if (!parse_top_decl()) recover();
        }
        finish_checks();
        ParseResult result;
        result.diagnostics = std::move(diags_);
        bool failed = std::any_of(result.diagnostics.begin(), result.diagnostics.end(),
                                  [](const Diagnostic& d) { return d.severity == Severity::Error; });
        if (!failed) result.kb = std::move(kb_);
        return result;
    }

private:
    Lexer lex_;
    Token tok_;
    KnowledgeBase kb_;
    std::vector<Diagnostic> diags_;
    std::size_t comments_taken_ = 0;

    // --- token plumbing -------------------------------------------------

    void bump() { tok_ = lex_.next(); }

    bool is_kw(const char* kw) const { return tok_.type == Tok::Ident && tok_.text == kw; }

    bool eat_kw(const char* kw) {
        if (!is_kw(kw)) return false;
        bump();
        return true;
    }

    bool at_name() const {
        return tok_.type == Tok::String || (tok_.type == Tok::Ident && !is_keyword(tok_.text));
    }

    void error_here(std::string msg, std::vector<std::string> expected = {}) {
        diags_.push_back({Severity::Error, tok_.span, std::move(msg), std::move(expected)});
    }

    void error_at(const SourceSpan& span, std::string msg) {
        diags_.push_back({Severity::Error, span, std::move(msg), {}});
    }

    bool expect(Tok type, const char* what) {
        if (tok_.type == type) {
            bump();
            return true;
        }
        error_here(std::string("expected ") + what, {what});
        return false;
    }

    bool expect_kw(const char* kw) {
        if (eat_kw(kw)) return true;
        error_here(std::string("expected '") + kw + "'", {kw});
        return false;
    }

    // error recovery: skip to the next top-level keyword at brace depth 0
    void recover() {
        int depth = 0;
        while (tok_.type != Tok::End) {
            if (tok_.type == Tok::LBrace) ++depth;
            if (tok_.type == Tok::RBrace) {
                if (depth == 0) { bump(); return; }
                --depth;
            }
            if (depth == 0 && tok_.type == Tok::Ident &&
                (tok_.text == "define" || tok_.text == "class" || tok_.text == "template" ||
                 tok_.text == "fragment" || tok_.text == "stub" || tok_.text == "constraint" ||
                 tok_.text == "scenario" || tok_.text == "model"))
                return;
            bump();
        }
    }

    std::vector<std::string> take_comments(int decl_line) {
        const auto& all = lex_.comments();
        // maximal contiguous run of comment lines ending directly above decl_line
        std::size_t end = comments_taken_;
        while (end < all.size() && all[end].line < decl_line) ++end;
        std::size_t begin = end;
        int want = decl_line - 1;
        while (begin > comments_taken_ && all[begin - 1].line == want) {
            --begin;
            --want;
        }
        std::vector<std::string> out;
        for (std::size_t i = begin; i < end; ++i) out.push_back(all[i].text);
        comments_taken_ = end;
        return out;
    }

    // --- shared pieces ---------------------------------------------------

    std::string parse_name(const char* what) {
        if (at_name()) {
            std::string n = tok_.text;
            bump();
            return n;
        }
        error_here(std::string("expected ") + what, {"name"});
        return {};
    }

    bool parse_double(double& out) {
        if (tok_.type != Tok::Number) {
            error_here("expected number", {"number"});
            return false;
        }
        out = tok_.num;
        bump();
        return true;
    }

    bool parse_u64(std::uint64_t& out) {
        if (tok_.type != Tok::Number || tok_.text.find_first_of(".eE") != std::string::npos) {
            error_here("expected integer", {"integer"});
            return false;
        }
        auto [p, ec] = std::from_chars(tok_.text.data(), tok_.text.data() + tok_.text.size(), out);
        if (ec != std::errc{}) {
            error_here("integer out of range");
            return false;
        }
        bump();
        return true;
    }

    // states [ordered] { a, b, ... }
    std::optional<StateSpace> parse_states_clause() {
        if (!expect_kw("states")) return std::nullopt;
        StateSpace space;
        space.ordered = eat_kw("ordered");
        if (!parse_label_set(space.states)) return std::nullopt;
        return space;
    }

    bool parse_label_set(std::vector<std::string>& out) {
        if (!expect(Tok::LBrace, "'{'")) return false;
        if (tok_.type != Tok::RBrace) {
            while (true) {
                if (!at_name()) {
                    error_here("expected state label", {"label"});
                    return false;
                }
                out.push_back(tok_.text);
                bump();
                if (tok_.type == Tok::Comma) {
                    bump();
                    continue;
                }
                break;
            }
        }
        return expect(Tok::RBrace, "'}'");
    }

    bool parse_prob_vector(std::vector<double>& out) {
        Token open = tok_;
        if (!expect(Tok::LParen, "'('")) return false;
        while (true) {
            double v;
            if (!parse_double(v)) {
                if (tok_.type == Tok::End)
                    error_at(open.span, "unclosed '('");
                return false;
            }
            out.push_back(v);
            if (tok_.type == Tok::Comma) {
                bump();
                continue;
            }
            break;
        }
        if (tok_.type != Tok::RParen) {
            error_at(open.span, "unclosed '('");
            return false;
        }
        bump();
        return true;
    }

    bool parse_name_list_paren(std::vector<std::string>& out) {
        if (!expect(Tok::LParen, "'('")) return false;
        if (tok_.type != Tok::RParen) {
            while (true) {
                if (!at_name()) {
                    error_here("expected name", {"name"});
                    return false;
                }
                out.push_back(tok_.text);
                bump();
                if (tok_.type == Tok::Comma) {
                    bump();
                    continue;
                }
                break;
            }
        }
        return expect(Tok::RParen, "')'");
    }

    // ( term, term, ... ) where term := '*' | label | '{' labels '}'
    bool parse_pattern(ConfigPattern& out) {
        if (!expect(Tok::LParen, "'('")) return false;
        while (true) {
            PatternTerm term;
            if (tok_.type == Tok::Star) {
                term.wildcard = true;
                bump();
            } else if (tok_.type == Tok::LBrace) {
                if (!parse_label_set(term.states)) return false;
            } else if (at_name()) {
                term.states.push_back(tok_.text);
                bump();
            } else {
                error_here("expected '*', state label or '{'", {"*", "label", "{"});
                return false;
            }
            out.push_back(std::move(term));
            if (tok_.type == Tok::Comma) {
                bump();
                continue;
            }
            break;
        }
        return expect(Tok::RParen, "')'");
    }

    // evidence-style assignment list: ( V = s, W = t )
    bool parse_assignment_list(Evidence& out) {
        if (!expect(Tok::LParen, "'('")) return false;
        while (true) {
            std::string var = parse_name("variable name");
            if (!expect(Tok::Equals, "'='")) return false;
            std::string state = parse_name("state label");
            if (out.count(var)) error_here("variable '" + var + "' assigned twice");
            out[var] = state;
            if (tok_.type == Tok::Comma) {
                bump();
                continue;
            }
            break;
        }
        return expect(Tok::RParen, "')'");
    }

    // --- CPT clauses ------------------------------------------------------

    // Parses one of prior/cpt/partition/noisyor/deterministic. Fills decl.
    bool parse_cpt_clause(VarDecl& decl) {
        decl.cpt_span = tok_.span;
        if (eat_kw("prior")) {
            ExplicitCpt cpt;
            ExplicitCpt::Row row;
            if (!parse_prob_vector(row.probs)) return false;
            cpt.rows.push_back(std::move(row));
            decl.cpt = CptSpec{std::move(cpt)};
            return true;
        }
        if (eat_kw("cpt")) {
            if (!parse_name_list_paren(decl.parents)) return false;
            if (!expect(Tok::LBrace, "'{'")) return false;
            ExplicitCpt cpt;
            while (tok_.type == Tok::LParen) {
                ExplicitCpt::Row row;
                if (!parse_name_list_paren(row.config)) return false;
                if (!expect(Tok::Arrow, "'->'")) return false;
                if (!parse_prob_vector(row.probs)) return false;
                cpt.rows.push_back(std::move(row));
            }
            if (!expect(Tok::RBrace, "'}'")) return false;
            decl.cpt = CptSpec{std::move(cpt)};
            return true;
        }
        if (eat_kw("partition")) {
            if (!parse_name_list_paren(decl.parents)) return false;
            if (!expect(Tok::LBrace, "'{'")) return false;
            PartitionCpt cpt;
            while (is_kw("element")) {
                decl.element_spans.push_back(tok_.span);
                bump();
                PartitionCpt::Element el;
                while (tok_.type == Tok::LParen) {
                    ConfigPattern pat;
                    if (!parse_pattern(pat)) return false;
                    el.patterns.push_back(std::move(pat));
                }
                if (eat_kw("rationale")) {
                    if (tok_.type != Tok::String) {
                        error_here("expected string after 'rationale'", {"string"});
                        return false;
                    }
                    el.rationale = tok_.text;
                    bump();
                }
                if (!expect(Tok::Arrow, "'->'")) return false;
                if (!parse_prob_vector(el.dist)) return false;
                cpt.elements.push_back(std::move(el));
            }
            if (!expect(Tok::RBrace, "'}'")) return false;
            decl.cpt = CptSpec{std::move(cpt)};
            return true;
        }
        if (eat_kw("noisyor")) {
            if (!expect(Tok::LParen, "'('")) return false;
            NoisyOrCpt cpt;
            while (true) {
                std::string parent = parse_name("parent name");
                if (!expect(Tok::Colon, "':'")) return false;
                double p;
                if (!parse_double(p)) return false;
                decl.parents.push_back(std::move(parent));
                cpt.link.push_back(p);
                if (tok_.type == Tok::Comma) {
                    bump();
                    continue;
                }
                break;
            }
            if (!expect(Tok::RParen, "')'")) return false;
            if (eat_kw("leak")) {
                if (!parse_double(cpt.leak)) return false;
            }
            decl.cpt = CptSpec{std::move(cpt)};
            return true;
        }
        if (eat_kw("deterministic")) {
            if (!parse_name_list_paren(decl.parents)) return false;
            if (!expect(Tok::LBrace, "'{'")) return false;
            DeterministicCpt cpt;
            while (tok_.type == Tok::LParen) {
                DeterministicCpt::Rule rule;
                if (!parse_pattern(rule.pattern)) return false;
                if (!expect(Tok::Arrow, "'->'")) return false;
                rule.output = parse_name("child state");
                cpt.rules.push_back(std::move(rule));
            }
            if (!expect(Tok::RBrace, "'}'")) return false;
            decl.cpt = CptSpec{std::move(cpt)};
            return true;
        }
        return false; // not a CPT clause
    }

    // --- declarations -----------------------------------------------------

    bool parse_top_decl() {
        auto comments = take_comments(tok_.span.line);
        if (is_kw("define")) return parse_define(std::move(comments));
        if (is_kw("class")) return parse_class(std::move(comments));
        if (is_kw("template")) return parse_template(std::move(comments));
        if (is_kw("fragment") || is_kw("stub")) return parse_fragment(std::move(comments));
        if (is_kw("constraint")) return parse_constraint(std::move(comments));
        if (is_kw("scenario")) return parse_scenario(std::move(comments));
        if (is_kw("model")) return parse_model(std::move(comments));
        error_here("expected declaration",
                   {"define", "class", "template", "fragment", "stub", "constraint", "scenario", "model"});
        return false;
    }

    bool parse_define(std::vector<std::string> comments) {
        bump();
        DefineDecl d;
        d.span = tok_.span;
        d.comments = std::move(comments);
        d.name = parse_name("definition name");
        auto space = parse_states_clause();
        if (!space) return false;
        d.space = std::move(*space);
        if (eat_kw("description")) {
            if (tok_.type != Tok::String) {
                error_here("expected string after 'description'", {"string"});
                return false;
            }
            d.description = tok_.text;
            bump();
        }
        if (kb_.find_definition(d.name))
            error_at(d.span, "duplicate definition '" + d.name + "'");
        kb_.definitions.push_back(std::move(d));
        return true;
    }

    bool parse_class(std::vector<std::string> comments) {
        bump();
        ClassDecl c;
        c.span = tok_.span;
        c.comments = std::move(comments);
        c.name = parse_name("class name");
        if (eat_kw("extends")) c.parent = parse_name("class name");
        if (!expect(Tok::LBrace, "'{'")) return false;
        while (tok_.type != Tok::RBrace && tok_.type != Tok::End) {
            if (is_kw("states")) {
                auto space = parse_states_clause();
                if (!space) return false;
                c.states = std::move(*space);
            } else if (eat_kw("description")) {
                if (tok_.type != Tok::String) {
                    error_here("expected string after 'description'", {"string"});
                    return false;
                }
                c.description = tok_.text;
                bump();
            } else if (is_kw("prior")) {
                VarDecl dummy;
                if (!parse_cpt_clause(dummy)) return false;
                c.default_cpt = std::move(dummy.cpt);
            } else if (is_kw("constraint")) {
                ClassConstraint cc;
                cc.span = tok_.span;
                bump();
                if (!expect_kw("monotone")) return false;
                if (!expect_kw("self")) return false;
                if (!expect(Tok::Equals, "'='")) return false;
                cc.target_state = parse_name("state label");
                if (!expect_kw("along")) return false;
                if (!expect_kw("class")) return false;
                cc.parent_class = parse_name("class name");
                if (eat_kw("nonincreasing"))
                    cc.direction = Direction::NonIncreasing;
                else if (eat_kw("nondecreasing"))
                    cc.direction = Direction::NonDecreasing;
                else {
                    error_here("expected 'nonincreasing' or 'nondecreasing'",
                               {"nonincreasing", "nondecreasing"});
                    return false;
                }
                c.constraints.push_back(std::move(cc));
            } else {
                error_here("expected class feature",
                           {"states", "description", "prior", "constraint"});
                return false;
            }
        }
        if (!expect(Tok::RBrace, "'}'")) return false;
        if (kb_.find_class(c.name)) error_at(c.span, "duplicate class '" + c.name + "'");
        kb_.classes.push_back(std::move(c));
        return true;
    }

    bool parse_template(std::vector<std::string> comments) {
        bump();
        TemplateDecl t;
        t.span = tok_.span;
        t.comments = std::move(comments);
        t.name = parse_name("template name");
        if (!expect(Tok::LParen, "'('")) return false;
        while (true) {
            TemplateParam p;
            p.name = parse_name("parameter name");
            if (!expect(Tok::Colon, "':'")) return false;
            if (eat_kw("ident"))
                p.kind = TemplateParam::Kind::Ident;
            else if (eat_kw("states"))
                p.kind = TemplateParam::Kind::States;
            else {
                error_here("expected parameter kind", {"ident", "states"});
                return false;
            }
            t.params.push_back(std::move(p));
            if (tok_.type == Tok::Comma) {
                bump();
                continue;
            }
            break;
        }
        if (!expect(Tok::RParen, "')'")) return false;
        if (tok_.type != Tok::LBrace) {
            error_here("expected '{'", {"{"});
            return false;
        }
        // raw capture starts right after the '{' we are looking at
        bool ok = false;
        {
            // tok_ currently holds '{'; the lexer position is just past it
            std::string body = lex_.capture_braced_body(ok);
            if (!ok) {
                error_here("unterminated template body");
                return false;
            }
            t.body = normalize_body(body);
        }
        bump(); // load the token after '}'

        // every placeholder must be declared
        std::set<std::string> params;
        for (const auto& p : t.params) params.insert(p.name);
        for (const auto& ph : placeholders_of(t.body))
            if (!params.count(ph))
                error_at(t.span, "template '" + t.name + "' uses undeclared placeholder $" + ph);

        if (kb_.find_template(t.name)) error_at(t.span, "duplicate template '" + t.name + "'");
        kb_.templates.push_back(std::move(t));
        return true;
    }

    static std::string normalize_body(std::string_view body) {
        std::string out;
        bool in_string = false, pending_space = false;
        for (std::size_t i = 0; i < body.size(); ++i) {
            char c = body[i];
            if (in_string) {
                out += c;
                if (c == '\\' && i + 1 < body.size()) out += body[++i];
                else if (c == '"') in_string = false;
                continue;
            }
            if (c == '"') {
                if (pending_space && !out.empty()) out += ' ';
                pending_space = false;
                in_string = true;
                out += c;
                continue;
            }
            if (c == '#') {
                while (i + 1 < body.size() && body[i + 1] != '\n') ++i;
                continue;
            }
            if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
                pending_space = true;
                continue;
            }
            if (pending_space && !out.empty()) out += ' ';
            pending_space = false;
            out += c;
        }
        return out;
    }

    // placeholders substitute everywhere, inside string literals too
    static std::vector<std::string> placeholders_of(std::string_view body) {
        std::vector<std::string> out;
        for (std::size_t i = 0; i < body.size(); ++i) {
            char c = body[i];
            if (c != '$') continue;
            if (i + 1 < body.size() && body[i + 1] == '$') {
                ++i;
                continue;
            }
            std::size_t j = i + 1;
            std::string name;
            while (j < body.size() &&
                   (std::isalnum(static_cast<unsigned char>(body[j])) || body[j] == '_'))
                name += body[j++];
            if (!name.empty()) out.push_back(name);
            i = j - 1;
        }
        return out;
    }

    bool parse_fragment(std::vector<std::string> comments) {
        bool is_stub = eat_kw("stub");
        if (!expect_kw("fragment")) return false;
        FragmentDecl f;
        f.is_stub = is_stub;
        f.span = tok_.span;
        f.comments = std::move(comments);
        f.name = parse_name("fragment name");
        if (!expect(Tok::LBrace, "'{'")) return false;
        while (tok_.type != Tok::RBrace && tok_.type != Tok::End) {
            auto item_comments = take_comments(tok_.span.line);
            if (eat_kw("description")) {
                if (tok_.type != Tok::String) {
                    error_here("expected string after 'description'", {"string"});
                    return false;
                }
                f.description = tok_.text;
                bump();
            } else if (is_kw("input")) {
                bump();
                InputDecl in;
                in.span = tok_.span;
                in.comments = std::move(item_comments);
                in.name = parse_name("input name");
                if (is_kw("states")) {
                    auto space = parse_states_clause();
                    if (!space) return false;
                    in.states = std::move(*space);
                }
                if (f.find_input(in.name) || f.find_var(in.name))
                    error_at(in.span, "duplicate variable '" + in.name + "' in fragment '" + f.name + "'");
                f.items.emplace_back(std::move(in));
            } else if (is_kw("var")) {
                bump();
                VarDecl v;
                v.span = tok_.span;
                v.comments = std::move(item_comments);
                v.name = parse_name("variable name");
                if (eat_kw("class")) v.class_ref = parse_name("class name");
                if (is_kw("states")) {
                    auto space = parse_states_clause();
                    if (!space) return false;
                    v.states = std::move(*space);
                }
                if (eat_kw("description")) {
                    if (tok_.type != Tok::String) {
                        error_here("expected string after 'description'", {"string"});
                        return false;
                    }
                    v.description = tok_.text;
                    bump();
                }
                if (is_kw("prior") || is_kw("cpt") || is_kw("partition") || is_kw("noisyor") ||
                    is_kw("deterministic")) {
                    if (!parse_cpt_clause(v)) return false;
                }
                if (f.find_input(v.name) || f.find_var(v.name))
                    error_at(v.span, "duplicate variable '" + v.name + "' in fragment '" + f.name + "'");
                f.items.emplace_back(std::move(v));
            } else {
                error_here("expected fragment item", {"input", "var", "description"});
                return false;
            }
        }
        if (!expect(Tok::RBrace, "'}'")) return false;

        check_fragment(f);
        if (kb_.find_fragment(f.name)) error_at(f.span, "duplicate fragment '" + f.name + "'");
        kb_.fragments.push_back(std::move(f));
        return true;
    }

    void check_fragment(const FragmentDecl& f) {
        // parent references resolve within the fragment
        for (const auto* v : f.vars())
            for (const auto& p : v->parents)
                if (!f.find_input(p) && !f.find_var(p))
                    error_at(v->span, "variable '" + v->name + "' references unknown parent '" + p +
                                          "' in fragment '" + f.name + "'");
        // resident subgraph acyclic (inputs have no parents, so residents suffice)
        auto vars = f.vars();
        std::map<std::string, int> color; // 0 new, 1 open, 2 done
        std::function<bool(const VarDecl*)> visit = [&](const VarDecl* v) -> bool {
            int& c = color[v->name];
            if (c == 1) return false;
            if (c == 2) return true;
            c = 1;
            for (const auto& p : v->parents)
                if (const VarDecl* pv = f.find_var(p))
                    if (!visit(pv)) return false;
            c = 2;
            return true;
        };
        for (const auto* v : vars)
            if (!visit(v)) {
                error_at(f.span, "cycle among resident variables of fragment '" + f.name + "'");
                break;
            }
    }

    bool parse_constraint(std::vector<std::string> comments) {
        bump();
        TopConstraint tc;
        tc.span = tok_.span;
        tc.comments = std::move(comments);
        if (eat_kw("monotone")) {
            MonotoneConstraint c;
            c.child = parse_name("variable name");
            if (!expect(Tok::Equals, "'='")) return false;
            c.target_state = parse_name("state label");
            if (!expect_kw("along")) return false;
            c.parent = parse_name("parent name");
            if (eat_kw("nonincreasing"))
                c.direction = Direction::NonIncreasing;
            else if (eat_kw("nondecreasing"))
                c.direction = Direction::NonDecreasing;
            else {
                error_here("expected 'nonincreasing' or 'nondecreasing'",
                           {"nonincreasing", "nondecreasing"});
                return false;
            }
            tc.constraint = std::move(c);
        } else if (eat_kw("inequality")) {
            InequalityConstraint c;
            c.child = parse_name("variable name");
            if (!expect(Tok::Equals, "'='")) return false;
            c.target_state = parse_name("state label");
            if (!expect(Tok::Colon, "':'")) return false;
            if (!parse_assignment_list(c.config_a)) return false;
            if (tok_.type == Tok::Less)
                c.relation = Relation::Less;
            else if (tok_.type == Tok::LessEq)
                c.relation = Relation::LessEqual;
            else {
                error_here("expected '<' or '<='", {"<", "<="});
                return false;
            }
            bump();
            if (!parse_assignment_list(c.config_b)) return false;
            tc.constraint = std::move(c);
        } else {
            error_here("expected 'monotone' or 'inequality'", {"monotone", "inequality"});
            return false;
        }
        kb_.constraints.push_back(std::move(tc));
        return true;
    }

    bool parse_scenario(std::vector<std::string> comments) {
        bump();
        ScenarioDecl s;
        s.span = tok_.span;
        s.comments = std::move(comments);
        s.name = parse_name("scenario name");
        if (!expect(Tok::LBrace, "'{'")) return false;
        while (tok_.type != Tok::RBrace && tok_.type != Tok::End) {
            if (eat_kw("description")) {
                if (tok_.type != Tok::String) {
                    error_here("expected string after 'description'", {"string"});
                    return false;
                }
                s.description = tok_.text;
                bump();
            } else if (eat_kw("focus")) {
                while (true) {
                    s.focus.push_back(parse_name("variable name"));
                    if (tok_.type == Tok::Comma) {
                        bump();
                        continue;
                    }
                    break;
                }
            } else if (eat_kw("evidence")) {
                ScenarioDecl::EvidenceVar ev;
                SourceSpan at = tok_.span;
                ev.variable = parse_name("variable name");
                if (eat_kw("in")) {
                    if (!parse_label_set(ev.allowed)) return false;
                    if (ev.allowed.empty()) error_at(at, "empty allowed-state set");
                }
                for (const auto& other : s.evidence)
                    if (other.variable == ev.variable)
                        error_at(at, "evidence variable '" + ev.variable + "' listed twice");
                s.evidence.push_back(std::move(ev));
            } else if (eat_kw("generate")) {
                if (eat_kw("exhaustive")) {
                    s.generation.exhaustive = true;
                } else if (eat_kw("sampled")) {
                    s.generation.exhaustive = false;
                    if (!parse_u64(s.generation.samples)) return false;
                    if (!expect_kw("seed")) return false;
                    if (!parse_u64(s.generation.seed)) return false;
                    s.generation.outside = eat_kw("outside");
                } else {
                    error_here("expected 'exhaustive' or 'sampled'", {"exhaustive", "sampled"});
                    return false;
                }
            } else {
                error_here("expected scenario item", {"description", "focus", "evidence", "generate"});
                return false;
            }
        }
        if (!expect(Tok::RBrace, "'}'")) return false;

        for (const auto& fvar : s.focus)
            for (const auto& ev : s.evidence)
                if (ev.variable == fvar)
                    error_at(s.span, "scenario '" + s.name + "': focus variable '" + fvar +
                                         "' also listed as evidence");
        if (kb_.find_scenario(s.name)) error_at(s.span, "duplicate scenario '" + s.name + "'");
        kb_.scenarios.push_back(std::move(s));
        return true;
    }

    bool parse_model(std::vector<std::string> comments) {
        SourceSpan at = tok_.span;
        bump();
        if (kb_.composition.present) error_at(at, "duplicate model block");
        CompositionSpec m;
        m.present = true;
        m.span = at;
        m.comments = std::move(comments);
        if (!expect(Tok::LBrace, "'{'")) return false;
        while (tok_.type != Tok::RBrace && tok_.type != Tok::End) {
            if (eat_kw("use")) {
                std::string n = parse_name("fragment name");
                if (std::find(m.use.begin(), m.use.end(), n) != m.use.end())
                    error_here("fragment '" + n + "' used twice");
                m.use.push_back(std::move(n));
            } else if (eat_kw("instantiate")) {
                InstantiateDirective d;
                d.span = tok_.span;
                d.template_name = parse_name("template name");
                if (!expect_kw("with")) return false;
                while (true) {
                    std::string param = parse_name("parameter name");
                    if (!expect(Tok::Equals, "'='")) return false;
                    TemplateValue value;
                    if (tok_.type == Tok::LBrace) {
                        std::vector<std::string> labels;
                        if (!parse_label_set(labels)) return false;
                        value = std::move(labels);
                    } else {
                        value = parse_name("value");
                    }
                    d.args.emplace_back(std::move(param), std::move(value));
                    if (tok_.type == Tok::Comma) {
                        bump();
                        continue;
                    }
                    break;
                }
                m.instantiate.push_back(std::move(d));
            } else if (eat_kw("bind")) {
                BindDirective b;
                b.span = tok_.span;
                b.from_fragment = parse_name("fragment name");
                if (!expect(Tok::Dot, "'.'")) return false;
                b.from_input = parse_name("input name");
                if (!expect(Tok::Arrow, "'->'")) return false;
                b.to_fragment = parse_name("fragment name");
                if (!expect(Tok::Dot, "'.'")) return false;
                b.to_resident = parse_name("variable name");
                for (const auto& other : m.binds)
                    if (other.from_fragment == b.from_fragment && other.from_input == b.from_input)
                        error_at(b.span, "input '" + b.from_fragment + "." + b.from_input +
                                             "' bound twice");
                m.binds.push_back(std::move(b));
            } else if (eat_kw("exogenous")) {
                ExogenousDirective e;
                e.span = tok_.span;
                e.variable = parse_name("variable name");
                if (!expect_kw("prior")) return false;
                if (!parse_prob_vector(e.prior)) return false;
                for (const auto& other : m.exogenous)
                    if (other.variable == e.variable)
                        error_at(e.span, "variable '" + e.variable + "' declared exogenous twice");
                m.exogenous.push_back(std::move(e));
            } else {
                error_here("expected model directive", {"use", "instantiate", "bind", "exogenous"});
                return false;
            }
        }
        if (!expect(Tok::RBrace, "'}'")) return false;
        kb_.composition = std::move(m);
        return true;
    }

    // checks that need the whole KB
    void finish_checks() {
        for (const auto& c : kb_.classes)
            if (c.parent && !kb_.find_class(*c.parent))
                error_at(c.span, "class '" + c.name + "' extends unknown class '" + *c.parent + "'");
        for (const auto& f : kb_.fragments)
            for (const auto* v : f.vars())
                if (v->class_ref && !kb_.find_class(*v->class_ref))
                    error_at(v->span,
                             "variable '" + v->name + "' references unknown class '" + *v->class_ref + "'");

        if (!kb_.composition.present) return;
        std::set<std::string> known;
        for (const auto& f : kb_.fragments) known.insert(f.name);
        for (const auto& d : kb_.composition.instantiate) {
            if (!kb_.find_template(d.template_name))
                error_at(d.span, "instantiate references unknown template '" + d.template_name + "'");
            else
                known.insert(instantiated_fragment_name(*kb_.find_template(d.template_name), d.args));
        }
        for (const auto& u : kb_.composition.use)
            if (!known.count(u)) error_at(kb_.composition.span, "use of unknown fragment '" + u + "'");
        for (const auto& b : kb_.composition.binds) {
            if (!known.count(b.from_fragment))
                error_at(b.span, "bind references unknown fragment '" + b.from_fragment + "'");
            if (!known.count(b.to_fragment))
                error_at(b.span, "bind references unknown fragment '" + b.to_fragment + "'");
        }
    }

public:
    static std::string instantiated_fragment_name(
        const TemplateDecl& tmpl, const std::vector<std::pair<std::string, TemplateValue>>& args) {
        std::string suffix;
        for (const auto& p : tmpl.params) {
            if (p.kind != TemplateParam::Kind::Ident) continue;
            for (const auto& [name, value] : args)
                if (name == p.name)
                    if (const auto* s = std::get_if<std::string>(&value)) {
                        if (!suffix.empty()) suffix += ",";
                        suffix += *s;
                    }
        }
        return suffix.empty() ? tmpl.name : tmpl.name + "/" + suffix;
    }
};

} // namespace

ParseResult parse_kb(std::string_view text, const std::string& file) {
    return Parser(text, file).run();
}

std::string instantiated_name(const TemplateDecl& tmpl,
                              const std::vector<std::pair<std::string, TemplateValue>>& args) {
    return Parser::instantiated_fragment_name(tmpl, args);
}

bool structurally_equal(const KnowledgeBase& a, const KnowledgeBase& b) {
    return serialize_kb(a) == serialize_kb(b);
}

} // namespace bnforge
