#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "bnforge/kb.hpp"
#include "bnforge/rng.hpp"
#include "support/generators.hpp"

using namespace bnforge;

TEST_CASE("minimal KB parses to one fragment with one resident variable") {
    auto result = parse_kb("fragment F { var A states {t,f} prior (0.3,0.7) }");
    REQUIRE(result.ok());
    REQUIRE(result.kb->fragments.size() == 1);
    const auto& f = result.kb->fragments[0];
    CHECK(f.name == "F");
    CHECK_FALSE(f.is_stub);
    REQUIRE(f.vars().size() == 1);
    const VarDecl& v = *f.vars()[0];
    CHECK(v.name == "A");
    REQUIRE(v.states.has_value());
    CHECK(v.states->states == std::vector<std::string>{"t", "f"});
    REQUIRE(v.cpt.has_value());
    const auto& cpt = std::get<ExplicitCpt>(*v.cpt);
    REQUIRE(cpt.rows.size() == 1);
    CHECK(cpt.rows[0].probs == std::vector<double>{0.3, 0.7});
}

TEST_CASE("unclosed probability vector is reported at the opening parenthesis") {
    std::string text = "fragment F { var A states {t,f} prior (0.3 0.7 }";
    auto result = parse_kb(text);
    CHECK_FALSE(result.ok());
    REQUIRE_FALSE(result.diagnostics.empty());
    const auto& d = result.diagnostics[0];
    CHECK(d.span.line == 1);
    CHECK(d.span.column == static_cast<int>(text.find("(0.3")) + 1);
    CHECK(d.message.find("unclosed") != std::string::npos);
}

TEST_CASE("duplicate fragment names are diagnosed") {
    auto result = parse_kb("fragment F { var A states {t,f} prior (1,0) }\n"
                           "fragment F { var B states {t,f} prior (1,0) }\n");
    CHECK_FALSE(result.ok());
    bool found = false;
    for (const auto& d : result.diagnostics)
        if (d.message.find("duplicate fragment 'F'") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("duplicate variables within a fragment are diagnosed") {
    auto result = parse_kb("fragment F { var A states {t,f} prior (1,0) var A states {t,f} prior (1,0) }");
    CHECK_FALSE(result.ok());
}

TEST_CASE("a cycle among resident variables is diagnosed") {
    auto result = parse_kb(
        "fragment F {\n"
        "  var A states {t,f} cpt (B) { (t) -> (1,0) (f) -> (0,1) }\n"
        "  var B states {t,f} cpt (A) { (t) -> (1,0) (f) -> (0,1) }\n"
        "}\n");
    CHECK_FALSE(result.ok());
    bool found = false;
    for (const auto& d : result.diagnostics)
        if (d.message.find("cycle among resident variables") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("unknown parent references are diagnosed") {
    auto result = parse_kb("fragment F { var A states {t,f} cpt (Ghost) { (t) -> (1,0) (f) -> (1,0) } }");
    CHECK_FALSE(result.ok());
    bool found = false;
    for (const auto& d : result.diagnostics)
        if (d.message.find("unknown parent 'Ghost'") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("every CPT form, classes, constraints, scenarios and model blocks parse") {
    const char* text = R"(
# registry
define "Terrain Suitability" states {suitable, unsuitable} description "from the terrain database"

class Distance {
  states ordered {near, mid, far}
  description "a distance"
  prior (0.2, 0.5, 0.3)
}
class "Distance to Target" extends Distance { }
class Detection {
  states {seen, missed}
  constraint monotone self = seen along class Distance nonincreasing
}

template Attrition(X : ident, initial : states) {
  var "Initial $X" states $initial prior (0.15, 0.35, 0.35, 0.15)
}

fragment Env {
  var "Distance to Target" class "Distance to Target" prior (0.2, 0.5, 0.3)
  var Cue states {yes, no} prior (0.4, 0.6)
}

stub fragment Sensors {
  input "Distance to Target" states ordered {near, mid, far}
  input Cue states {yes, no}
  var Looking states {yes, no} prior (0.7, 0.3)
  var Seen class Detection noisyor (Cue: 0.8, Looking: 0.6) leak 0.05
  var Dwell states ordered {short, long}
      partition ("Distance to Target", Cue) {
        element (near, *) ({mid, far}, yes) rationale "activity dominates" -> (0.3, 0.7)
        element ({mid, far}, no) -> (0.6, 0.4)
      }
  var Alarm states {on, off} deterministic (Seen) {
    (seen) -> on
    (missed) -> off
  }
  var Fused states {t, f} cpt (Seen, Cue) {
    (seen, yes) -> (0.9, 0.1)
    (seen, no) -> (0.8, 0.2)
    (missed, yes) -> (0.3, 0.7)
    (missed, no) -> (0.1, 0.9)
  }
}

constraint monotone Seen = seen along "Distance to Target" nonincreasing
constraint inequality Fused = t : (Seen = seen, Cue = yes) <= (Seen = seen, Cue = no)

scenario Sweep {
  description "exhaustive over the cue"
  focus Seen
  evidence Cue in {yes, no}
  generate exhaustive
}
scenario Odd {
  focus Seen
  evidence Cue
  generate sampled 3 seed 11 outside
}

model {
  use Env
  use Sensors
  instantiate Attrition with X = TEL, initial = {n0, n1, n2, n3}
  bind Sensors."Distance to Target" -> Env."Distance to Target"
  bind Sensors.Cue -> Env.Cue
}
)";
    auto result = parse_kb(text);
    for (const auto& d : result.diagnostics) CAPTURE(d.message);
    REQUIRE(result.ok());
    const auto& kb = *result.kb;
    CHECK(kb.definitions.size() == 1);
    CHECK(kb.classes.size() == 3);
    CHECK(kb.templates.size() == 1);
    CHECK(kb.fragments.size() == 2);
    CHECK(kb.constraints.size() == 2);
    CHECK(kb.scenarios.size() == 2);
    CHECK(kb.composition.present);
    CHECK(kb.composition.binds.size() == 2);
    CHECK(kb.composition.instantiate.size() == 1);
    CHECK(kb.find_fragment("Sensors")->is_stub);
    CHECK(kb.find_class("Detection")->constraints.size() == 1);
    CHECK(kb.scenarios[1].generation.outside);

    // comment attached to the define survives
    CHECK(kb.definitions[0].comments == std::vector<std::string>{"registry"});
}

TEST_CASE("an empty allowed-state set is diagnosed") {
    auto result = parse_kb("fragment F { var A states {t,f} prior (0.5, 0.5) }\n"
                           "scenario S { focus A evidence B in {} }\n");
    CHECK_FALSE(result.ok());
    bool found = false;
    for (const auto& d : result.diagnostics)
        if (d.message.find("empty allowed-state set") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("templates with undeclared placeholders are diagnosed") {
    auto result = parse_kb("template T(X : ident) { var \"$X\" states $R prior (1, 0) }");
    CHECK_FALSE(result.ok());
    bool found = false;
    for (const auto& d : result.diagnostics)
        if (d.message.find("undeclared placeholder $R") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("parse is total on malformed input") {
    const char* cases[] = {
        "",
        "fragment",
        "fragment F {",
        "fragment F { var }",
        "class {}{}{}",
        "model model model",
        "((((((((((",
        "\"unterminated",
        "fragment F { var A states {t,f} noisyor (A: ) }",
        "scenario S { focus }",
        "constraint inequality A = b : (X = ) < (Y = z)",
        "# just a comment\n",
    };
    for (const char* text : cases) {
        auto result = parse_kb(text);
        CHECK((result.ok() || !result.diagnostics.empty()));
    }
    // random garbage never crashes the parser
    Rng rng(99);
    for (int i = 0; i < 200; ++i) {
        std::string junk;
        std::size_t len = rng.below(120);
        for (std::size_t j = 0; j < len; ++j)
            junk += static_cast<char>(32 + rng.below(95));
        (void)parse_kb(junk);
    }
    // structured fuzz: random streams of real tokens reach deeper parse paths
    const char* tokens[] = {"fragment", "var",   "input", "states",  "prior",  "cpt",
                            "partition", "element", "noisyor", "deterministic", "rationale",
                            "class",    "extends", "template", "scenario", "model", "use",
                            "bind",     "exogenous", "constraint", "monotone", "inequality",
                            "focus",    "evidence", "generate", "sampled", "seed", "outside",
                            "{",        "}",     "(",     ")",       ",",      "->",
                            "=",        ":",     "<",     "<=",      "*",      "ordered",
                            "A",        "\"x y\"", "0.5", "1",       "leak",   "with"};
    for (int i = 0; i < 300; ++i) {
        std::string stream;
        std::size_t len = rng.below(60);
        for (std::size_t j = 0; j < len; ++j) {
            stream += tokens[rng.below(std::size(tokens))];
            stream += ' ';
        }
        (void)parse_kb(stream);
    }
}

TEST_CASE("diagnostics carry spans inside the offending token") {
    auto result = parse_kb("fragment F { var A states {t,f} prior (0.3,0.7) }\nbogus");
    REQUIRE_FALSE(result.ok());
    const auto& d = result.diagnostics[0];
    CHECK(d.span.line == 2);
    CHECK(d.span.column == 1);
    CHECK(d.span.length == 5);
}

TEST_CASE("round-trip: parse(serialize(kb)) is structurally equal, serialize idempotent") {
    Rng rng(12345);
    for (int i = 0; i < 250; ++i) {
        KnowledgeBase kb = testgen::random_kb(rng);
        std::string text = serialize_kb(kb);
        auto parsed = parse_kb(text, "<roundtrip>");
        for (const auto& d : parsed.diagnostics) {
            CAPTURE(text);
            CAPTURE(d.message);
        }
        REQUIRE(parsed.ok());
        CHECK(structurally_equal(*parsed.kb, kb));
        CHECK(serialize_kb(*parsed.kb) == text); // idempotence
    }
}

TEST_CASE("numbers serialize at shortest round-trip precision, never re-rounded") {
    KnowledgeBase kb;
    FragmentDecl f;
    f.name = "F";
    VarDecl v;
    v.name = "A";
    v.states = StateSpace{{"t", "f"}, false};
    ExplicitCpt prior;
    double p = 0.1 + 0.2; // 0.30000000000000004
    prior.rows.push_back({{}, {p, 1.0 - p}});
    v.cpt = CptSpec{std::move(prior)};
    f.items.emplace_back(std::move(v));
    kb.fragments.push_back(std::move(f));

    std::string text = serialize_kb(kb);
    CHECK(text.find("0.30000000000000004") != std::string::npos);
    auto parsed = parse_kb(text);
    REQUIRE(parsed.ok());
    const auto& row = std::get<ExplicitCpt>(*parsed.kb->fragments[0].vars()[0]->cpt).rows[0];
    CHECK(row.probs[0] == p); // bit-exact
}

TEST_CASE("quoted names with spaces and escapes round-trip") {
    auto good = parse_kb(
        "fragment \"Report # TELs\" { var \"Initial #TEL\" states {\"0\", \"1\"} "
        "description \"says \\\"hi\\\"\" prior (0.5, 0.5) }");
    REQUIRE(good.ok());
    const auto& v = *good.kb->fragments[0].vars()[0];
    CHECK(v.name == "Initial #TEL");
    CHECK(v.description == "says \"hi\"");
    std::string text = serialize_kb(*good.kb);
    auto again = parse_kb(text);
    REQUIRE(again.ok());
    CHECK(structurally_equal(*again.kb, *good.kb));
}

TEST_CASE("instantiated fragment names follow the template/ident convention") {
    TemplateDecl t;
    t.name = "Attrition";
    t.params = {{"X", TemplateParam::Kind::Ident}, {"R", TemplateParam::Kind::States}};
    std::vector<std::pair<std::string, TemplateValue>> args{
        {"X", TemplateValue{std::string("TEL")}},
        {"R", TemplateValue{std::vector<std::string>{"n0", "n1"}}}};
    CHECK(instantiated_name(t, args) == "Attrition/TEL");
}
