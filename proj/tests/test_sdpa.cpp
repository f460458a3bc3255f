#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <stdexcept>
#include <string>

#include "fhinf/lmi_builders.hpp"
#include "fhinf/model_json.hpp"
#include "fhinf/rng.hpp"
#include "fhinf/sdp.hpp"
#include "fhinf/sdpa_io.hpp"

using namespace fhinf;

namespace {

SdpFeasibilityProblem example_problem() {
    const TsDelayModel model = load_model(FHINF_EXAMPLE_MODEL);
    SynthesisLmiOptions opt;
    opt.h = 0.5;
    opt.rho = 0.2;
    opt.omega = 2.0;
    opt.gamma = 0.3;
    return canonicalize(build_theorem1(model, opt));
}

void check_roundtrip(const SdpFeasibilityProblem& sdp, int trials) {
    const SdpFeasibilityProblem back = import_sdpa(export_sdpa(sdp));
    REQUIRE(back.d == sdp.d);
    REQUIRE(back.blocks.size() == sdp.blocks.size());
    Rng rng(101);
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        const Vector x = rng.uniform_vector(sdp.d, -1.0, 1.0);
        for (std::size_t b = 0; b < sdp.blocks.size(); ++b) {
            const Matrix gap = back.blocks[b].evaluate(x) - sdp.blocks[b].evaluate(x);
            worst = std::max(worst, gap.cwiseAbs().maxCoeff());
        }
    }
    CHECK(worst < 1e-12);
}

}  // namespace

TEST_CASE("export emits the sparse header and the sense annotations") {
    const SdpFeasibilityProblem sdp = example_problem();
    const std::string text = export_sdpa(sdp);
    CHECK(text.find("42") != std::string::npos);
    CHECK(text.find("*sense") != std::string::npos);
    CHECK(text.find("*label") != std::string::npos);
    CHECK(text.find("pair_1_1") != std::string::npos);
    // Upper-triangle convention: every data line has five columns.
    const std::size_t first_data = text.find("\n0 ");
    CHECK(first_data != std::string::npos);
}

TEST_CASE("export and import agree on every block at random points") {
    check_roundtrip(example_problem(), 20);
}

TEST_CASE("round trip preserves senses, labels, and dimensions") {
    const SdpFeasibilityProblem sdp = example_problem();
    const SdpFeasibilityProblem back = import_sdpa(export_sdpa(sdp));
    for (std::size_t b = 0; b < sdp.blocks.size(); ++b) {
        CHECK(back.blocks[b].label == sdp.blocks[b].label);
        CHECK(back.blocks[b].sense == sdp.blocks[b].sense);
        CHECK(back.blocks[b].dim == sdp.blocks[b].dim);
    }
}

TEST_CASE("export is deterministic") {
    const SdpFeasibilityProblem sdp = example_problem();
    CHECK(export_sdpa(sdp) == export_sdpa(sdp));
}

TEST_CASE("a truncated file is rejected with the line position") {
    const std::string text = export_sdpa(example_problem());
    // Cut inside the header region so that a mandatory line goes missing.
    const std::string cut = text.substr(0, 100);
    try {
        import_sdpa(cut);
        CHECK(false);
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("line") != std::string::npos);
    }
}

TEST_CASE("garbage input is rejected") {
    CHECK_THROWS_AS(import_sdpa("not an sdpa file"), std::runtime_error);
    CHECK_THROWS_AS(import_sdpa(""), std::runtime_error);
}

TEST_CASE("files without sense comments import as plain semidefinite blocks") {
    // Minimal hand-written file: one scalar, one 1x1 block, F0 = 1, F1 = 2.
    const std::string text = "1\n1\n1\n0 1 1 1 1.0\n1 1 1 1 2.0\n";
    const SdpFeasibilityProblem sdp = import_sdpa(text);
    CHECK(sdp.d == 1);
    REQUIRE(sdp.blocks.size() == 1);
    CHECK(sdp.blocks[0].sense == Sense::PosSemiDef);
    Vector x(1);
    x << 3.0;
    // Imported as F(x) = sum x_k M_k - M0.
    CHECK(sdp.blocks[0].evaluate(x)(0, 0) == doctest::Approx(5.0));
}
