#pragma once

#include <string>
#include <vector>

#include "coalflow/measures.hpp"

namespace coalflow {

/// Parses `pos@weight,pos@weight,...`.
std::vector<Atom> parse_atoms(const std::string& text);

/// Mechanism terms joined by '+': `feller:BETA`, `stable:GAMMA`,
/// `atoms:R@W,...`. Example: `stable:1.5`, `atoms:1@1`.
BranchingMechanism parse_mechanism(const std::string& text);

/// `kingman`, `beta:A,C[,MASS]`, `atoms:X@W,...` (Lambda weights) or
/// `nu-atoms:X@W,...` (nu weights).
LambdaMeasure parse_lambda(const std::string& text);

}  // namespace coalflow
