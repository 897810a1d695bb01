#include "bnforge/version_store.hpp"

#include <algorithm>
#include <ctime>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "bnforge/errors.hpp"
#include "bnforge/sha256.hpp"
#include "render.hpp"

namespace bnforge {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string with_comments(const std::vector<std::string>& comments, const std::string& body) {
    std::string out;
    for (const auto& c : comments) out += "# " + c + "\n";
    return out + body;
}

std::string config_text(const std::vector<std::string>& config) {
    std::string out = "(";
    for (std::size_t i = 0; i < config.size(); ++i) {
        if (i) out += ", ";
        out += config[i];
    }
    return out + ")";
}

template <typename T>
std::map<std::string, const T*> by_name(const std::vector<T>& xs) {
    std::map<std::string, const T*> out;
    for (const auto& x : xs) out.emplace(x.name, &x);
    return out;
}

// keyed symmetric difference over name -> node
template <typename T, typename Render>
void diff_named(const std::vector<T>& a, const std::vector<T>& b, const std::string& kind,
                const std::string& path_prefix, Render render, std::vector<DiffEntry>& out) {
    auto am = by_name(a);
    auto bm = by_name(b);
    for (const auto& [name, node] : am) {
        auto bit = bm.find(name);
        if (bit == bm.end()) {
            DiffEntry e{kind, "removed", path_prefix + name, "", "", *node, std::monostate{}};
            out.push_back(std::move(e));
        } else if (render(*node) != render(*bit->second)) {
            DiffEntry e{kind, "changed", path_prefix + name, "", "", *node, *bit->second};
            out.push_back(std::move(e));
        }
    }
    for (const auto& [name, node] : bm)
        if (!am.count(name)) {
            DiffEntry e{kind, "added", path_prefix + name, "", "", std::monostate{}, *node};
            out.push_back(std::move(e));
        }
}

std::string var_meta_text(const VarDecl& v) {
    VarDecl stripped = v;
    stripped.parents.clear();
    stripped.cpt.reset();
    return with_comments(v.comments, render::var_decl(stripped, ""));
}

void diff_cpts(const FragmentDecl& fa, const VarDecl& va, const VarDecl& vb,
               std::vector<DiffEntry>& out) {
    const std::string base = "fragment " + fa.name + " / var " + va.name;
    if (va.parents != vb.parents) {
        DiffEntry e{"arc", "changed", base + " / parents", fa.name, va.name,
                    DiffEntry::ArcChange{va.parents}, DiffEntry::ArcChange{vb.parents}};
        out.push_back(std::move(e));
    }

    auto cpt_text = [&](const VarDecl& v) {
        return v.cpt ? render::cpt_clause(v.parents, *v.cpt, "") : std::string("(none)");
    };
    if (cpt_text(va) == cpt_text(vb) && va.parents == vb.parents) return;

    const auto* ea = va.cpt ? std::get_if<ExplicitCpt>(&*va.cpt) : nullptr;
    const auto* eb = vb.cpt ? std::get_if<ExplicitCpt>(&*vb.cpt) : nullptr;
    if (ea && eb && va.parents == vb.parents) {
        // row-level diff, keyed by parent configuration
        std::map<std::vector<std::string>, const ExplicitCpt::Row*> ra, rb;
        for (const auto& r : ea->rows) ra.emplace(r.config, &r);
        for (const auto& r : eb->rows) rb.emplace(r.config, &r);
        for (const auto& [config, row] : ra) {
            auto bit = rb.find(config);
            if (bit == rb.end()) {
                out.push_back({"cpt-row", "removed", base + " / row " + config_text(config), fa.name,
                               va.name, DiffEntry::RowChange{config, row->probs}, std::monostate{}});
            } else if (render::prob_vector(row->probs) != render::prob_vector(bit->second->probs)) {
                out.push_back({"cpt-row", "changed", base + " / row " + config_text(config), fa.name,
                               va.name, DiffEntry::RowChange{config, row->probs},
                               DiffEntry::RowChange{config, bit->second->probs}});
            }
        }
        for (const auto& [config, row] : rb)
            if (!ra.count(config))
                out.push_back({"cpt-row", "added", base + " / row " + config_text(config), fa.name,
                               va.name, std::monostate{}, DiffEntry::RowChange{config, row->probs}});
        return;
    }
    if (cpt_text(va) != cpt_text(vb))
        out.push_back({"cpt", "changed", base + " / cpt", fa.name, va.name,
                       DiffEntry::CptChange{va.parents, va.cpt},
                       DiffEntry::CptChange{vb.parents, vb.cpt}});
}

void diff_fragment_pair(const FragmentDecl& fa, const FragmentDecl& fb, std::vector<DiffEntry>& out) {
    const std::string base = "fragment " + fa.name;
    if (fa.is_stub != fb.is_stub || fa.description != fb.description || fa.comments != fb.comments) {
        out.push_back({"fragment-meta", "changed", base, fa.name, "",
                       DiffEntry::FragmentMeta{fa.is_stub, fa.description, fa.comments},
                       DiffEntry::FragmentMeta{fb.is_stub, fb.description, fb.comments}});
    }

    std::map<std::string, const InputDecl*> ia, ib;
    for (const auto* in : fa.inputs()) ia.emplace(in->name, in);
    for (const auto* in : fb.inputs()) ib.emplace(in->name, in);
    auto input_text = [](const InputDecl& in) {
        return with_comments(in.comments, render::input_decl(in));
    };
    for (const auto& [name, in] : ia) {
        auto bit = ib.find(name);
        if (bit == ib.end())
            out.push_back({"input", "removed", base + " / input " + name, fa.name, name, *in,
                           std::monostate{}});
        else if (input_text(*in) != input_text(*bit->second))
            out.push_back({"input", "changed", base + " / input " + name, fa.name, name, *in,
                           *bit->second});
    }
    for (const auto& [name, in] : ib)
        if (!ia.count(name))
            out.push_back({"input", "added", base + " / input " + name, fa.name, name,
                           std::monostate{}, *in});

    std::map<std::string, const VarDecl*> va, vb;
    for (const auto* v : fa.vars()) va.emplace(v->name, v);
    for (const auto* v : fb.vars()) vb.emplace(v->name, v);
    for (const auto& [name, v] : va) {
        auto bit = vb.find(name);
        if (bit == vb.end()) {
            out.push_back({"variable", "removed", base + " / var " + name, fa.name, name, *v,
                           std::monostate{}});
            continue;
        }
        if (var_meta_text(*v) != var_meta_text(*bit->second)) {
            // a declaration-level change replaces the whole variable
            out.push_back({"variable", "changed", base + " / var " + name, fa.name, name, *v,
                           *bit->second});
            continue;
        }
        diff_cpts(fa, *v, *bit->second, out);
    }
    for (const auto& [name, v] : vb)
        if (!va.count(name))
            out.push_back({"variable", "added", base + " / var " + name, fa.name, name,
                           std::monostate{}, *v});
}

int kind_order(const std::string& kind) {
    static const std::vector<std::string> order = {"definition", "class",    "template", "fragment",
                                                   "fragment-meta", "input", "variable", "arc",
                                                   "cpt",        "cpt-row",  "constraint", "scenario",
                                                   "composition"};
    for (std::size_t i = 0; i < order.size(); ++i)
        if (order[i] == kind) return static_cast<int>(i);
    return static_cast<int>(order.size());
}

} // namespace

KbDiff diff_kbs(const KnowledgeBase& a, const KnowledgeBase& b) {
    KbDiff diff;
    auto& out = diff.entries;

    diff_named(a.definitions, b.definitions, "definition", "definition ", [](const DefineDecl& d) {
        return with_comments(d.comments, render::define_decl(d));
    }, out);
    diff_named(a.classes, b.classes, "class", "class ", [](const ClassDecl& c) {
        return with_comments(c.comments, render::class_decl(c));
    }, out);
    diff_named(a.templates, b.templates, "template", "template ", [](const TemplateDecl& t) {
        return with_comments(t.comments, render::template_decl(t));
    }, out);
    diff_named(a.scenarios, b.scenarios, "scenario", "scenario ", [](const ScenarioDecl& s) {
        return with_comments(s.comments, render::scenario_decl(s));
    }, out);

    // fragments: removed/added whole; shared names diff item by item
    {
        auto am = by_name(a.fragments);
        auto bm = by_name(b.fragments);
        for (const auto& [name, f] : am) {
            auto bit = bm.find(name);
            if (bit == bm.end())
                out.push_back({"fragment", "removed", "fragment " + name, name, "", *f,
                               std::monostate{}});
            else
                diff_fragment_pair(*f, *bit->second, out);
        }
        for (const auto& [name, f] : bm)
            if (!am.count(name))
                out.push_back({"fragment", "added", "fragment " + name, name, "", std::monostate{},
                               *f});
    }

    // constraints: multiset by canonical text
    {
        auto text_of = [](const TopConstraint& tc) {
            return with_comments(tc.comments, render::constraint_decl(tc.constraint));
        };
        std::map<std::string, std::vector<const TopConstraint*>> ca, cb;
        for (const auto& tc : a.constraints) ca[text_of(tc)].push_back(&tc);
        for (const auto& tc : b.constraints) cb[text_of(tc)].push_back(&tc);
        for (const auto& [text, list] : ca) {
            std::size_t other = cb.count(text) ? cb[text].size() : 0;
            for (std::size_t i = other; i < list.size(); ++i)
                out.push_back({"constraint", "removed",
                               "constraint " + render::constraint_decl(list[0]->constraint), "", "",
                               *list[0], std::monostate{}});
        }
        for (const auto& [text, list] : cb) {
            std::size_t other = ca.count(text) ? ca[text].size() : 0;
            for (std::size_t i = other; i < list.size(); ++i)
                out.push_back({"constraint", "added",
                               "constraint " + render::constraint_decl(list[0]->constraint), "", "",
                               std::monostate{}, *list[0]});
        }
    }

    // composition: one entry for the whole block
    {
        auto text_of = [](const CompositionSpec& m) {
            return m.present ? with_comments(m.comments, render::composition_block(m))
                             : std::string("(absent)");
        };
        if (text_of(a.composition) != text_of(b.composition))
            out.push_back({"composition", "changed", "model", "", "", a.composition, b.composition});
    }

    std::sort(out.begin(), out.end(), [](const DiffEntry& x, const DiffEntry& y) {
        int kx = kind_order(x.kind), ky = kind_order(y.kind);
        if (kx != ky) return kx < ky;
        if (x.path != y.path) return x.path < y.path;
        return x.op < y.op;
    });
    return diff;
}

void apply_diff(KnowledgeBase& kb, const KbDiff& diff) {
    auto fragment_of = [&](const DiffEntry& e) -> FragmentDecl& {
        for (auto& f : kb.fragments)
            if (f.name == e.fragment) return f;
        throw Error("apply_diff: unknown fragment '" + e.fragment + "'");
    };
    auto var_of = [&](const DiffEntry& e) -> VarDecl& {
        FragmentDecl& f = fragment_of(e);
        for (auto& item : f.items)
            if (auto* v = std::get_if<VarDecl>(&item))
                if (v->name == e.variable) return *v;
        throw Error("apply_diff: unknown variable '" + e.variable + "'");
    };

    for (const auto& e : diff.entries) {
        if (e.kind == "definition") {
            if (e.op == "removed")
                std::erase_if(kb.definitions, [&](const DefineDecl& d) {
                    return d.name == std::get<DefineDecl>(e.old_value).name;
                });
            else if (e.op == "added")
                kb.definitions.push_back(std::get<DefineDecl>(e.new_value));
            else
                for (auto& d : kb.definitions)
                    if (d.name == std::get<DefineDecl>(e.new_value).name)
                        d = std::get<DefineDecl>(e.new_value);
        } else if (e.kind == "class") {
            if (e.op == "removed")
                std::erase_if(kb.classes, [&](const ClassDecl& c) {
                    return c.name == std::get<ClassDecl>(e.old_value).name;
                });
            else if (e.op == "added")
                kb.classes.push_back(std::get<ClassDecl>(e.new_value));
            else
                for (auto& c : kb.classes)
                    if (c.name == std::get<ClassDecl>(e.new_value).name)
                        c = std::get<ClassDecl>(e.new_value);
        } else if (e.kind == "template") {
            if (e.op == "removed")
                std::erase_if(kb.templates, [&](const TemplateDecl& t) {
                    return t.name == std::get<TemplateDecl>(e.old_value).name;
                });
            else if (e.op == "added")
                kb.templates.push_back(std::get<TemplateDecl>(e.new_value));
            else
                for (auto& t : kb.templates)
                    if (t.name == std::get<TemplateDecl>(e.new_value).name)
                        t = std::get<TemplateDecl>(e.new_value);
        } else if (e.kind == "scenario") {
            if (e.op == "removed")
                std::erase_if(kb.scenarios, [&](const ScenarioDecl& s) {
                    return s.name == std::get<ScenarioDecl>(e.old_value).name;
                });
            else if (e.op == "added")
                kb.scenarios.push_back(std::get<ScenarioDecl>(e.new_value));
            else
                for (auto& s : kb.scenarios)
                    if (s.name == std::get<ScenarioDecl>(e.new_value).name)
                        s = std::get<ScenarioDecl>(e.new_value);
        } else if (e.kind == "fragment") {
            if (e.op == "removed")
                std::erase_if(kb.fragments, [&](const FragmentDecl& f) {
                    return f.name == std::get<FragmentDecl>(e.old_value).name;
                });
            else if (e.op == "added")
                kb.fragments.push_back(std::get<FragmentDecl>(e.new_value));
        } else if (e.kind == "fragment-meta") {
            FragmentDecl& f = fragment_of(e);
            const auto& meta = std::get<DiffEntry::FragmentMeta>(e.new_value);
            f.is_stub = meta.is_stub;
            f.description = meta.description;
            f.comments = meta.comments;
        } else if (e.kind == "input") {
            FragmentDecl& f = fragment_of(e);
            if (e.op == "removed")
                std::erase_if(f.items, [&](const FragmentItem& item) {
                    const auto* in = std::get_if<InputDecl>(&item);
                    return in && in->name == e.variable;
                });
            else if (e.op == "added")
                f.items.emplace_back(std::get<InputDecl>(e.new_value));
            else
                for (auto& item : f.items)
                    if (auto* in = std::get_if<InputDecl>(&item))
                        if (in->name == e.variable) *in = std::get<InputDecl>(e.new_value);
        } else if (e.kind == "variable") {
            FragmentDecl& f = fragment_of(e);
            if (e.op == "removed")
                std::erase_if(f.items, [&](const FragmentItem& item) {
                    const auto* v = std::get_if<VarDecl>(&item);
                    return v && v->name == e.variable;
                });
            else if (e.op == "added")
                f.items.emplace_back(std::get<VarDecl>(e.new_value));
            else
                for (auto& item : f.items)
                    if (auto* v = std::get_if<VarDecl>(&item))
                        if (v->name == e.variable) *v = std::get<VarDecl>(e.new_value);
        } else if (e.kind == "arc") {
            var_of(e).parents = std::get<DiffEntry::ArcChange>(e.new_value).parents;
        } else if (e.kind == "cpt") {
            var_of(e).cpt = std::get<DiffEntry::CptChange>(e.new_value).cpt;
        } else if (e.kind == "cpt-row") {
            VarDecl& v = var_of(e);
            if (!v.cpt) throw Error("apply_diff: cpt-row on a variable without a CPT");
            auto& rows = std::get<ExplicitCpt>(*v.cpt).rows;
            if (e.op == "removed") {
                const auto& rc = std::get<DiffEntry::RowChange>(e.old_value);
                std::erase_if(rows, [&](const ExplicitCpt::Row& r) { return r.config == rc.config; });
            } else if (e.op == "added") {
                const auto& rc = std::get<DiffEntry::RowChange>(e.new_value);
                rows.push_back({rc.config, rc.probs});
            } else {
                const auto& rc = std::get<DiffEntry::RowChange>(e.new_value);
                for (auto& r : rows)
                    if (r.config == rc.config) r.probs = rc.probs;
            }
        } else if (e.kind == "constraint") {
            if (e.op == "added") {
                kb.constraints.push_back(std::get<TopConstraint>(e.new_value));
            } else {
                const auto& target = std::get<TopConstraint>(e.old_value);
                std::string text = render::constraint_decl(target.constraint);
                for (std::size_t i = 0; i < kb.constraints.size(); ++i)
                    if (render::constraint_decl(kb.constraints[i].constraint) == text &&
                        kb.constraints[i].comments == target.comments) {
                        kb.constraints.erase(kb.constraints.begin() + static_cast<long>(i));
                        break;
                    }
            }
        } else if (e.kind == "composition") {
            kb.composition = std::get<CompositionSpec>(e.new_value);
        }
    }
}

// --- store ----------------------------------------------------------------

namespace {

std::string now_utc() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace

VersionStore::VersionStore(std::filesystem::path root) : root_(std::move(root)) {
    std::error_code ec;
    std::filesystem::create_directories(root_ / "objects", ec);
    if (ec) throw StoreError("cannot create store at " + root_.string() + ": " + ec.message());
}

std::filesystem::path VersionStore::object_path(const std::string& id) const {
    return root_ / "objects" / (id + ".bnkb");
}

std::filesystem::path VersionStore::log_path() const { return root_ / "log.jsonl"; }

bool VersionStore::has(const std::string& id) const {
    return std::filesystem::exists(object_path(id));
}

KbVersion VersionStore::snapshot(const KnowledgeBase& kb, const std::string& message,
                                 const std::string& rationale, const std::string& parent) {
    std::string canonical = serialize_kb(kb);
    std::string id = sha256_hex(canonical);

    for (const auto& v : log())
        if (v.id == id) return v; // content addressing: identical KB, same version

    if (!parent.empty() && !has(parent)) throw StoreError("unknown parent version '" + parent + "'");

    auto tmp = object_path(id);
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw StoreError("cannot write " + tmp.string());
        out << canonical;
    }
    std::filesystem::rename(tmp, object_path(id));

    KbVersion v{id, parent, message, rationale, now_utc()};
    ordered_json j;
    j["id"] = v.id;
    j["parent"] = v.parent;
    j["message"] = v.message;
    j["rationale"] = v.rationale;
    j["timestamp"] = v.timestamp;
    std::ofstream log_out(log_path(), std::ios::app | std::ios::binary);
    if (!log_out) throw StoreError("cannot append to " + log_path().string());
    log_out << j.dump() << "\n";
    return v;
}

std::string VersionStore::load_text(const std::string& id) const {
    std::ifstream in(object_path(id), std::ios::binary);
    if (!in) throw StoreError("unknown version id '" + id + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

KnowledgeBase VersionStore::load(const std::string& id) const {
    ParseResult result = parse_kb(load_text(id), id);
    if (!result.ok()) throw StoreError("stored version '" + id + "' does not parse");
    return std::move(*result.kb);
}

KbDiff VersionStore::diff(const std::string& id_a, const std::string& id_b) const {
    KnowledgeBase a = load(id_a);
    KnowledgeBase b = load(id_b);
    KbDiff d = diff_kbs(a, b);
    d.from_id = id_a;
    d.to_id = id_b;
    return d;
}

std::vector<KbVersion> VersionStore::log() const {
    std::vector<KbVersion> raw;
    std::ifstream in(log_path(), std::ios::binary);
    std::string line;
    while (in && std::getline(in, line)) {
        if (line.empty()) continue;
        ordered_json j = ordered_json::parse(line, nullptr, false);
        if (j.is_discarded()) continue;
        raw.push_back({j.value("id", ""), j.value("parent", ""), j.value("message", ""),
                       j.value("rationale", ""), j.value("timestamp", "")});
    }

    // children after parents; siblings ordered by (timestamp, id)
    std::set<std::string> known;
    for (const auto& v : raw) known.insert(v.id);
    std::vector<KbVersion> out;
    std::set<std::string> placed;
    auto ready = [&](const KbVersion& v) {
        return v.parent.empty() || !known.count(v.parent) || placed.count(v.parent);
    };
    std::vector<KbVersion> pending = raw;
    std::stable_sort(pending.begin(), pending.end(), [](const KbVersion& a, const KbVersion& b) {
        if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
        return a.id < b.id;
    });
    while (!pending.empty()) {
        bool progress = false;
        for (std::size_t i = 0; i < pending.size(); ++i) {
            if (!ready(pending[i])) continue;
            placed.insert(pending[i].id);
            out.push_back(pending[i]);
            pending.erase(pending.begin() + static_cast<long>(i));
            progress = true;
            break;
        }
        if (!progress) { // defensive: broken parent chain
            for (const auto& v : pending) out.push_back(v);
            break;
        }
    }
    return out;
}

std::string VersionStore::head() const {
    auto entries = log();
    return entries.empty() ? "" : entries.back().id;
}

} // namespace bnforge
