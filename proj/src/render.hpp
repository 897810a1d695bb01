#pragma once

// Internal canonical-text rendering, shared by serialize_kb and the
// version-store diff (node identity = rendered text).

#include <string>

#include "bnforge/kb.hpp"

namespace bnforge::render {

std::string name(const std::string& n);
std::string number(double v);
std::string prob_vector(const std::vector<double>& v);
std::string states_clause(const StateSpace& s);
std::string cpt_clause(const std::vector<std::string>& parents, const CptSpec& spec,
                       const std::string& indent);
std::string define_decl(const DefineDecl& d);
std::string class_decl(const ClassDecl& c);
std::string template_decl(const TemplateDecl& t);
std::string input_decl(const InputDecl& i);
std::string var_decl(const VarDecl& v, const std::string& indent);
std::string fragment_decl(const FragmentDecl& f);
std::string constraint_decl(const Constraint& c);
std::string scenario_decl(const ScenarioDecl& s);
std::string composition_block(const CompositionSpec& m);

} // namespace bnforge::render
