#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bnforge/kb.hpp"

namespace bnforge {

struct KbVersion {
    std::string id;     // sha256 of the canonical serialization
    std::string parent; // empty for roots
    std::string message;
    std::string rationale;
    std::string timestamp; // ISO 8601 UTC; never part of the id
};

/// One structural difference between two KB versions. Payloads carry the
/// full old/new nodes so a diff can be replayed onto the older version.
struct DiffEntry {
    struct ArcChange {
        std::vector<std::string> parents;
    };
    struct RowChange {
        std::vector<std::string> config;
        std::vector<double> probs;
    };
    struct CptChange {
        std::vector<std::string> parents;
        std::optional<CptSpec> cpt;
    };
    struct FragmentMeta {
        bool is_stub = false;
        std::string description;
        std::vector<std::string> comments;
    };
    using Payload = std::variant<std::monostate, DefineDecl, ClassDecl, TemplateDecl, FragmentDecl,
                                 InputDecl, VarDecl, ArcChange, RowChange, CptChange, FragmentMeta,
                                 TopConstraint, ScenarioDecl, CompositionSpec>;

    std::string kind; // definition|class|template|fragment|fragment-meta|input|variable|arc|cpt|cpt-row|constraint|scenario|composition
    std::string op;   // added|removed|changed
    std::string path; // human-readable location, e.g. "fragment F / var B / row (t, f)"
    std::string fragment; // structured keys for replay
    std::string variable;
    Payload old_value;
    Payload new_value;
};

struct KbDiff {
    std::string from_id, to_id;
    std::vector<DiffEntry> entries;
    bool empty() const { return entries.empty(); }
};

/// Structural diff at the granularity of classes, fragments, variables,
/// arcs, CPT rows, constraints, scenarios (plus definitions and the model
/// block). A renamed fragment is removed + added; there is no rename
/// detection.
KbDiff diff_kbs(const KnowledgeBase& a, const KnowledgeBase& b);

/// Replays a diff onto `kb` (which must be the diff's `from` version).
/// After apply, serialize_kb(kb) equals the `to` version's canonical form.
void apply_diff(KnowledgeBase& kb, const KbDiff& diff);

/// Content-addressed snapshot store: objects/<id>.bnkb plus an append-only
/// log.jsonl. Snapshots are atomic (write-temp-then-rename).
class VersionStore {
public:
    explicit VersionStore(std::filesystem::path root);

    /// Idempotent for identical content: returns the existing version.
    KbVersion snapshot(const KnowledgeBase& kb, const std::string& message,
                       const std::string& rationale, const std::string& parent = "");

    KnowledgeBase load(const std::string& id) const;
    std::string load_text(const std::string& id) const;
    bool has(const std::string& id) const;

    KbDiff diff(const std::string& id_a, const std::string& id_b) const;

    /// Topological order, children after parents; siblings by (timestamp, id).
    std::vector<KbVersion> log() const;

    /// Id of the most recent log entry, empty for a fresh store.
    std::string head() const;

    const std::filesystem::path& root() const { return root_; }

private:
    std::filesystem::path root_;
    std::filesystem::path object_path(const std::string& id) const;
    std::filesystem::path log_path() const;
};

} // namespace bnforge
