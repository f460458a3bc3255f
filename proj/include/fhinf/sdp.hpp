#pragma once

#include <string>
#include <vector>

#include "fhinf/lmi.hpp"

namespace fhinf {

// One canonicalized constraint block F(x) = F0 + sum_k x_k F_k with the
// original sense preserved.
struct SdpBlock {
    std::string label;
    Sense sense = Sense::NegDef;
    int dim = 0;
    Matrix f0;
    std::vector<std::pair<int, Matrix>> coeff;  // (scalar index, symmetric F_k), ascending

    Matrix evaluate(const Vector& x) const;
};

// Directory entry mapping a named matrix variable to its scalar range.
struct VariableRange {
    std::string name;
    int offset = 0;
    int count = 0;
    int rows = 0;
    int cols = 0;
    bool symmetric = false;
};

struct SdpFeasibilityProblem {
    int d = 0;  // number of scalar unknowns
    std::vector<SdpBlock> blocks;
    std::vector<VariableRange> directory;
};

// Lower-triangle vectorization of every variable; block evaluation matches the
// source expressions exactly.
SdpFeasibilityProblem canonicalize(const LmiProblem& problem);

// Strictness margin of block b at x: -lambda_max(F(x)) for negdef blocks,
// +lambda_min(F(x)) for possemidef blocks; positive means satisfied strictly.
std::vector<double> block_margins(const SdpFeasibilityProblem& problem, const Vector& x);

// Worst violation over all blocks: max of lambda_max(F(x)) (negdef) and
// -lambda_min(F(x)) (possemidef).  Negative certifies the point.
double eigen_margin(const SdpFeasibilityProblem& problem, const Vector& x);

}  // namespace fhinf
