#include "bnforge/templates.hpp"

#include <cctype>

#include "lexer.hpp"
#include "render.hpp"

namespace bnforge {

namespace {

bool legal_identifier(const std::string& s) {
    if (s.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    return true;
}

// state-range values substitute as the bare label list "{a, b, c}"
std::string render_value(const TemplateValue& v) {
    if (const auto* s = std::get_if<std::string>(&v)) return *s;
    const auto& labels = std::get<std::vector<std::string>>(v);
    std::string out = "{";
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (i) out += ", ";
        out += render::name(labels[i]);
    }
    return out + "}";
}

} // namespace

InstantiationResult instantiate_template(
    const TemplateDecl& tmpl, const std::vector<std::pair<std::string, TemplateValue>>& bindings) {
    InstantiationResult result;
    auto fail = [&](const std::string& msg) {
        result.diagnostics.push_back({Severity::Error, tmpl.span, msg, {}});
    };

    std::map<std::string, const TemplateValue*> by_name;
    for (const auto& [name, value] : bindings) {
        if (by_name.count(name)) fail("parameter '" + name + "' bound twice");
        by_name[name] = &value;
    }
    for (const auto& [name, value] : bindings) {
        bool declared = false;
        for (const auto& p : tmpl.params) declared = declared || p.name == name;
        if (!declared) fail("template '" + tmpl.name + "' has no parameter '" + name + "'");
    }
    std::map<std::string, std::string> subst;
    for (const auto& p : tmpl.params) {
        auto it = by_name.find(p.name);
        if (it == by_name.end()) {
            fail("unbound parameter '" + p.name + "' of template '" + tmpl.name + "'");
            continue;
        }
        if (p.kind == TemplateParam::Kind::Ident) {
            const auto* s = std::get_if<std::string>(it->second);
            if (!s || !legal_identifier(*s)) {
                fail("parameter '" + p.name + "' requires a legal identifier value");
                continue;
            }
            subst[p.name] = *s;
        } else {
            const auto* labels = std::get_if<std::vector<std::string>>(it->second);
            if (!labels || labels->empty()) {
                fail("parameter '" + p.name + "' requires a non-empty state list");
                continue;
            }
            subst[p.name] = render_value(*it->second);
        }
    }
    if (!result.diagnostics.empty()) return result;

    std::string body;
    const std::string& src = tmpl.body;
    for (std::size_t i = 0; i < src.size(); ++i) {
        if (src[i] != '$') {
            body += src[i];
            continue;
        }
        if (i + 1 < src.size() && src[i + 1] == '$') {
            body += '$';
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        std::string ph;
        while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
            ph += src[j++];
        auto it = subst.find(ph);
        if (it == subst.end()) {
            fail("undeclared placeholder $" + ph); // parser should have caught this
            return result;
        }
        body += it->second;
        i = j - 1;
    }

    std::string fragment_name = instantiated_name(tmpl, bindings);
    std::string text = "fragment " + render::name(fragment_name) + " { " + body + " }";
    ParseResult parsed = parse_kb(text, "<template " + tmpl.name + ">");
    for (auto& d : parsed.diagnostics) result.diagnostics.push_back(std::move(d));
    if (!parsed.ok()) return result;
    if (parsed.kb->fragments.size() != 1) {
        fail("template body of '" + tmpl.name + "' did not produce exactly one fragment");
        return result;
    }
    result.fragment = std::move(parsed.kb->fragments[0]);
    return result;
}

} // namespace bnforge
