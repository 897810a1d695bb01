#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bnforge/constraints.hpp"
#include "bnforge/cpt.hpp"
#include "bnforge/types.hpp"

namespace bnforge {

struct SourceSpan {
    std::string file;
    int line = 1;   // 1-based
    int column = 1; // 1-based
    int length = 0;
};

struct Diagnostic {
    Severity severity = Severity::Error;
    SourceSpan span;
    std::string message;
    std::vector<std::string> expected; // expected-token set for syntax errors
};

/// Central definition registry entry: name -> (state space, description).
struct DefineDecl {
    std::string name;
    StateSpace space;
    std::string description;
    std::vector<std::string> comments;
    SourceSpan span;
};

/// Class-level monotonicity constraint template. At compile time it emits a
/// concrete MonotoneConstraint for every variable of the class and every
/// parent whose class chain contains `parent_class`.
struct ClassConstraint {
    std::string target_state;
    std::string parent_class;
    Direction direction = Direction::NonIncreasing;
    SourceSpan span;
};

struct ClassDecl {
    std::string name;
    std::optional<std::string> parent;
    std::optional<StateSpace> states;
    std::optional<std::string> description;
    std::optional<CptSpec> default_cpt; // parentless prior
    std::vector<ClassConstraint> constraints;
    std::vector<std::string> comments;
    SourceSpan span;
};

struct InputDecl {
    std::string name;
    std::optional<StateSpace> states; // else resolved from the definition registry
    std::vector<std::string> comments;
    SourceSpan span;
};

struct VarDecl {
    std::string name;
    std::optional<std::string> class_ref;
    std::optional<StateSpace> states;
    std::string description;
    std::vector<std::string> parents;  // CPT conditioning order; empty for priors
    std::optional<CptSpec> cpt;        // else class default
    std::vector<std::string> comments;
    SourceSpan span;
    SourceSpan cpt_span;
    std::vector<SourceSpan> element_spans; // per partition element
};

using FragmentItem = std::variant<InputDecl, VarDecl>;

struct FragmentDecl {
    std::string name;
    bool is_stub = false;
    std::string description;
    std::vector<FragmentItem> items;
    std::vector<std::string> comments;
    SourceSpan span;

    std::vector<const InputDecl*> inputs() const;
    std::vector<const VarDecl*> vars() const;
    const InputDecl* find_input(const std::string& name) const;
    const VarDecl* find_var(const std::string& name) const;
};

struct TemplateParam {
    enum class Kind { Ident, States };
    std::string name;
    Kind kind = Kind::Ident;
};

struct TemplateDecl {
    std::string name;
    std::vector<TemplateParam> params;
    std::string body; // raw text, placeholders $name, $$ escapes a literal $
    std::vector<std::string> comments;
    SourceSpan span;
};

using TemplateValue = std::variant<std::string, std::vector<std::string>>; // ident | state list

struct ScenarioDecl {
    struct EvidenceVar {
        std::string variable;
        std::vector<std::string> allowed; // empty = all states
    };
    struct Generation {
        bool exhaustive = true;
        std::uint64_t samples = 0;
        std::uint64_t seed = 0;
        bool outside = false; // sample outside the allowed subsets
    };

    std::string name;
    std::string description;
    std::vector<std::string> focus;
    std::vector<EvidenceVar> evidence;
    Generation generation;
    std::vector<std::string> comments;
    SourceSpan span;
};

struct TopConstraint {
    Constraint constraint;
    std::vector<std::string> comments;
    SourceSpan span;
};

struct InstantiateDirective {
    std::string template_name;
    std::vector<std::pair<std::string, TemplateValue>> args;
    SourceSpan span;
};

struct BindDirective {
    std::string from_fragment, from_input;
    std::string to_fragment, to_resident;
    SourceSpan span;
};

struct ExogenousDirective {
    std::string variable;
    std::vector<double> prior;
    SourceSpan span;
};

/// The `model { ... }` block: which fragments to compose and how.
struct CompositionSpec {
    bool present = false;
    std::vector<std::string> use;
    std::vector<InstantiateDirective> instantiate;
    std::vector<BindDirective> binds;
    std::vector<ExogenousDirective> exogenous;
    std::vector<std::string> comments;
    SourceSpan span;
};

struct KnowledgeBase {
    std::vector<DefineDecl> definitions;
    std::vector<ClassDecl> classes;
    std::vector<TemplateDecl> templates;
    std::vector<FragmentDecl> fragments;
    std::vector<TopConstraint> constraints;
    std::vector<ScenarioDecl> scenarios;
    CompositionSpec composition;

    const FragmentDecl* find_fragment(const std::string& name) const;
    const ClassDecl* find_class(const std::string& name) const;
    const TemplateDecl* find_template(const std::string& name) const;
    const DefineDecl* find_definition(const std::string& name) const;
    const ScenarioDecl* find_scenario(const std::string& name) const;
};

struct ParseResult {
    std::optional<KnowledgeBase> kb; // present iff no error diagnostics
    std::vector<Diagnostic> diagnostics;
    bool ok() const { return kb.has_value(); }
};

/// Parses the .bnkb text format. Total: never throws on malformed input;
/// syntax and reference problems come back as diagnostics with spans.
ParseResult parse_kb(std::string_view text, const std::string& file = "<kb>");

/// Canonical serialization: name-keyed collections sorted, sequences in
/// declaration order, shortest round-trip number formatting. This is the
/// form the version store hashes.
std::string serialize_kb(const KnowledgeBase& kb);

/// Structural equality via the canonical form (spans are not structural).
bool structurally_equal(const KnowledgeBase& a, const KnowledgeBase& b);

/// Name of the fragment produced by instantiating `tmpl` with `args`:
/// template name plus "/" plus the identifier bindings in declaration order.
std::string instantiated_name(const TemplateDecl& tmpl,
                              const std::vector<std::pair<std::string, TemplateValue>>& args);

} // namespace bnforge
