#pragma once

#include <map>
#include <string>
#include <vector>

#include "bnforge/kb.hpp"
#include "bnforge/network.hpp"

namespace bnforge {

/// Fragments wired together by explicit bindings, separability checks
/// passed. Input variables are merged into their bound resident variables;
/// unbound inputs must be declared exogenous-with-prior.
struct ComposedModel {
    std::vector<FragmentDecl> fragments; // state spaces fully materialized
    std::vector<BindDirective> binds;
    std::vector<ExogenousDirective> exogenous;

    // (fragment, input) -> merged variable name
    std::map<std::pair<std::string, std::string>, std::string> alias;
    // merged variable name -> home fragment ("(exogenous)" for exogenous roots)
    std::map<std::string, std::string> home;
    // merged graph, child -> parents in CPT order
    std::map<std::string, std::vector<std::string>> parents;
};

/// Fills every input/var state space from, in order: explicit declaration,
/// class feature, central definition registry. Throws RefError if a space
/// cannot be resolved.
std::vector<FragmentDecl> resolve_spaces(const std::vector<FragmentDecl>& fragments,
                                         const std::vector<ClassDecl>& hierarchy,
                                         const std::vector<DefineDecl>& definitions);

/// Separability checks (throws ComposeError):
///   S1 HomeConflict      every merged variable has exactly one home CPT
///   S2 InterfaceMismatch merged variables have identical state spaces
///   S3 CrossCycle        the merged graph is acyclic
///   S4 UnboundInput      every input is bound or declared exogenous
ComposedModel compose(const std::vector<FragmentDecl>& fragments,
                      const std::vector<BindDirective>& binds,
                      const std::vector<ExogenousDirective>& exogenous);

/// Swaps a fragment for a replacement with a superset-compatible interface
/// (same-named inputs and bound residents, equal spaces), re-points the
/// bindings and re-runs every separability check.
ComposedModel substitute_stub(const ComposedModel& model, const std::string& stub_name,
                              const FragmentDecl& replacement);

/// Resolves class features, expands every CPT and records provenance.
/// Output variables are in canonical topological order (name tie-break), so
/// equal compositions compile to equal networks regardless of input order.
CompiledNetwork compile(const ComposedModel& model, const std::vector<ClassDecl>& hierarchy);

/// Concrete constraints for the compiled network: the KB's declared
/// constraints plus the monotone constraints emitted by class features.
/// Second element of each pair is the declaration site for reporting.
std::vector<std::pair<Constraint, SourceSpan>> collect_constraints(
    const KnowledgeBase& kb, const CompiledNetwork& net);

/// Full KB pipeline: instantiate templates, select fragments per the model
/// block (all fragments when absent), resolve spaces, compose.
ComposedModel assemble(const KnowledgeBase& kb);

struct CompiledBundle {
    CompiledNetwork net;
    std::vector<std::pair<Constraint, SourceSpan>> constraints;
};

CompiledBundle compile_kb(const KnowledgeBase& kb);

/// Content hash (hex) of the canonical network rendering; equal networks
/// have equal hashes.
std::string network_content_hash(const CompiledNetwork& net);

} // namespace bnforge
