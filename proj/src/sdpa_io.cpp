#include "fhinf/sdpa_io.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace fhinf {

namespace {

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Export sign: negdef blocks flip so every emitted block obeys the format's
// sum_k x_k M_k - M_0 >= 0 shape.
double export_sign(Sense sense, bool constant) {
    if (sense == Sense::NegDef) {
        return constant ? 1.0 : -1.0;
    }
    return constant ? -1.0 : 1.0;
}

void append_entries(std::ostringstream& out, int matno, int blockno, const Matrix& m,
                    double sign) {
    for (int r = 0; r < m.rows(); ++r) {
        for (int c = r; c < m.cols(); ++c) {
            const double v = sign * m(r, c);
            if (v == 0.0) {
                continue;
            }
            out << matno << " " << blockno << " " << (r + 1) << " " << (c + 1) << " "
                << format_value(v) << "\n";
        }
    }
}

[[noreturn]] void fail(int line, const std::string& what) {
    throw std::runtime_error("sdpa parse error at line " + std::to_string(line) + ": " + what);
}

}  // namespace

std::string export_sdpa(const SdpFeasibilityProblem& problem) {
    std::ostringstream out;
    out << "* delay filter toolkit feasibility export\n";
    for (std::size_t b = 0; b < problem.blocks.size(); ++b) {
        out << "*sense " << (b + 1) << " "
            << (problem.blocks[b].sense == Sense::NegDef ? "negdef" : "possemidef") << "\n";
        if (!problem.blocks[b].label.empty()) {
            out << "*label " << (b + 1) << " " << problem.blocks[b].label << "\n";
        }
    }
    out << problem.d << "\n";
    out << problem.blocks.size() << "\n";
    for (std::size_t b = 0; b < problem.blocks.size(); ++b) {
        out << problem.blocks[b].dim << (b + 1 == problem.blocks.size() ? "" : " ");
    }
    out << "\n";

    for (std::size_t b = 0; b < problem.blocks.size(); ++b) {
        const SdpBlock& block = problem.blocks[b];
        append_entries(out, 0, static_cast<int>(b + 1), block.f0,
                       export_sign(block.sense, true));
    }
    for (int k = 1; k <= problem.d; ++k) {
        for (std::size_t b = 0; b < problem.blocks.size(); ++b) {
            const SdpBlock& block = problem.blocks[b];
            for (const auto& [idx, fk] : block.coeff) {
                if (idx == k - 1) {
                    append_entries(out, k, static_cast<int>(b + 1), fk,
                                   export_sign(block.sense, false));
                }
            }
        }
    }
    return out.str();
}

SdpFeasibilityProblem import_sdpa(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;

    std::vector<std::pair<int, std::string>> senses;
    std::vector<std::pair<int, std::string>> labels;

    auto next_content_line = [&](bool required) -> bool {
        while (std::getline(in, line)) {
            ++lineno;
            std::size_t pos = line.find_first_not_of(" \t\r");
            if (pos == std::string::npos) {
                continue;
            }
            if (line[pos] == '*' || line[pos] == '"') {
                std::istringstream comment(line.substr(pos + 1));
                std::string tag;
                comment >> tag;
                int blockno = 0;
                std::string value;
                if (tag == "sense" && (comment >> blockno >> value)) {
                    senses.emplace_back(blockno, value);
                } else if (tag == "label" && (comment >> blockno >> value)) {
                    labels.emplace_back(blockno, value);
                }
                continue;
            }
            return true;
        }
        if (required) {
            fail(lineno, "unexpected end of file");
        }
        return false;
    };

    next_content_line(true);
    int d = 0;
    {
        std::istringstream hs(line);
        if (!(hs >> d) || d < 0) {
            fail(lineno, "expected the scalar count");
        }
    }
    next_content_line(true);
    int nblocks = 0;
    {
        std::istringstream hs(line);
        if (!(hs >> nblocks) || nblocks <= 0) {
            fail(lineno, "expected the block count");
        }
    }
    next_content_line(true);
    std::vector<int> dims;
    std::vector<bool> diagonal;
    {
        std::istringstream hs(line);
        int dim = 0;
        while (hs >> dim) {
            if (dim == 0) {
                fail(lineno, "zero block dimension");
            }
            diagonal.push_back(dim < 0);
            dims.push_back(std::abs(dim));
        }
        if (static_cast<int>(dims.size()) != nblocks) {
            fail(lineno, "block dimension list length mismatch");
        }
    }

    SdpFeasibilityProblem problem;
    problem.d = d;
    problem.blocks.resize(static_cast<std::size_t>(nblocks));
    std::vector<std::vector<Matrix>> raw(static_cast<std::size_t>(nblocks));
    for (int b = 0; b < nblocks; ++b) {
        problem.blocks[static_cast<std::size_t>(b)].dim = dims[static_cast<std::size_t>(b)];
        problem.blocks[static_cast<std::size_t>(b)].sense = Sense::PosSemiDef;
        raw[static_cast<std::size_t>(b)].assign(static_cast<std::size_t>(d) + 1,
                                                Matrix::Zero(dims[static_cast<std::size_t>(b)],
                                                             dims[static_cast<std::size_t>(b)]));
    }
    for (const auto& [blockno, sense] : senses) {
        if (blockno < 1 || blockno > nblocks) {
            fail(lineno, "sense comment references unknown block");
        }
        problem.blocks[static_cast<std::size_t>(blockno - 1)].sense =
            sense == "negdef" ? Sense::NegDef : Sense::PosSemiDef;
    }
    for (const auto& [blockno, label] : labels) {
        if (blockno >= 1 && blockno <= nblocks) {
            problem.blocks[static_cast<std::size_t>(blockno - 1)].label = label;
        }
    }

    while (next_content_line(false)) {
        std::istringstream es(line);
        int k = 0, blockno = 0, i = 0, j = 0;
        double value = 0.0;
        if (!(es >> k >> blockno >> i >> j >> value)) {
            fail(lineno, "malformed entry line");
        }
        if (k < 0 || k > d) {
            fail(lineno, "matrix number out of range");
        }
        if (blockno < 1 || blockno > nblocks) {
            fail(lineno, "block number out of range");
        }
        const int dim = dims[static_cast<std::size_t>(blockno - 1)];
        if (i < 1 || j < 1 || i > dim || j > dim || i > j) {
            fail(lineno, "entry indices out of range");
        }
        if (diagonal[static_cast<std::size_t>(blockno - 1)] && i != j) {
            fail(lineno, "off-diagonal entry in a diagonal block");
        }
        Matrix& m = raw[static_cast<std::size_t>(blockno - 1)][static_cast<std::size_t>(k)];
        m(i - 1, j - 1) = value;
        m(j - 1, i - 1) = value;
    }

    for (int b = 0; b < nblocks; ++b) {
        SdpBlock& block = problem.blocks[static_cast<std::size_t>(b)];
        const double c0 = export_sign(block.sense, true);
        const double ck = export_sign(block.sense, false);
        block.f0 = c0 * raw[static_cast<std::size_t>(b)][0];
        for (int k = 1; k <= d; ++k) {
            const Matrix& m = raw[static_cast<std::size_t>(b)][static_cast<std::size_t>(k)];
            if (m.cwiseAbs().maxCoeff() == 0.0) {
                continue;
            }
            block.coeff.emplace_back(k - 1, ck * m);
        }
    }
    return problem;
}

}  // namespace fhinf
