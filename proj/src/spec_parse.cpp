#include "coalflow/spec_parse.hpp"

#include <optional>
#include <sstream>

#include "coalflow/error.hpp"

namespace coalflow {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double to_number(const std::string& s) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(trim(s), &used);
  } catch (const std::exception&) {
    throw DomainError("not a number: '" + s + "'");
  }
  if (used != trim(s).size()) throw DomainError("not a number: '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

std::pair<std::string, std::string> family_and_params(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) return {trim(text), {}};
  return {trim(text.substr(0, colon)), trim(text.substr(colon + 1))};
}

}  // namespace

std::vector<Atom> parse_atoms(const std::string& text) {
  std::vector<Atom> atoms;
  for (const auto& item : split(text, ',')) {
    const auto at = item.find('@');
    if (at == std::string::npos) throw DomainError("atom '" + item + "' must be written pos@weight");
    atoms.push_back({to_number(item.substr(0, at)), to_number(item.substr(at + 1))});
  }
  if (atoms.empty()) throw DomainError("empty atom list");
  return atoms;
}

BranchingMechanism parse_mechanism(const std::string& text) {
  double beta = 0;
  std::optional<JumpMeasure> pi;
  for (const auto& term : split(text, '+')) {
    const auto [family, params] = family_and_params(term);
    if (family == "feller") {
      beta += params.empty() ? 0.5 : to_number(params);
    } else if (family == "stable" || family == "atoms") {
      if (pi) throw DomainError("mechanism may contain at most one jump measure");
      pi = family == "stable" ? JumpMeasure::stable(to_number(params)) : JumpMeasure::atoms(parse_atoms(params));
    } else {
      throw DomainError("unknown mechanism family '" + family + "' (expected feller, stable or atoms)");
    }
  }
  return BranchingMechanism(beta, std::move(pi));
}

LambdaMeasure parse_lambda(const std::string& text) {
  const auto [family, params] = family_and_params(text);
  if (family == "kingman") return LambdaMeasure::kingman();
  if (family == "beta") {
    const auto p = split(params, ',');
    if (p.size() != 2 && p.size() != 3) throw DomainError("beta Lambda expects beta:A,C[,MASS]");
    return LambdaMeasure::beta(to_number(p[0]), to_number(p[1]), p.size() == 3 ? to_number(p[2]) : 1.0);
  }
  if (family == "bs" || family == "bolthausen-sznitman") return LambdaMeasure::beta(1, 1);
  if (family == "atoms") return LambdaMeasure::atoms(parse_atoms(params));
  if (family == "nu-atoms") return LambdaMeasure::nu_atoms(parse_atoms(params));
  throw DomainError("unknown Lambda family '" + family + "' (expected kingman, beta, atoms or nu-atoms)");
}

}  // namespace coalflow
