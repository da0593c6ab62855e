#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

#include "rmpa/complexity.hpp"
#include "rmpa/decoder.hpp"
#include "rmpa/rm_code.hpp"

using namespace rmpa;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::int64_t bound_for(int m, int r, Rational rp, IterationSchedule schedule) {
    DecoderConfig cfg = default_config(schedule == IterationSchedule::Full
                                           ? DecoderVariant::Srpa
                                           : DecoderVariant::Sdss);
    cfg.r_p = rp;
    cfg.schedule = schedule;
    return count_fht_bound(make_code(m, r), cfg);
}

}  // namespace

TEST_CASE("transform-count bounds, full schedule", "[complexity]") {
    REQUIRE(bound_for(7, 3, {1, 16}, IterationSchedule::Full) == 384);
    REQUIRE(bound_for(7, 3, {1, 8}, IterationSchedule::Full) == 1536);
    REQUIRE(bound_for(7, 3, {1, 4}, IterationSchedule::Full) == 6144);
    REQUIRE(bound_for(7, 3, {1, 2}, IterationSchedule::Full) == 24576);

    REQUIRE(bound_for(8, 3, {1, 16}, IterationSchedule::Full) == 2048);
    REQUIRE(bound_for(8, 3, {1, 8}, IterationSchedule::Full) == 8192);
    REQUIRE(bound_for(8, 3, {1, 4}, IterationSchedule::Full) == 32768);
    REQUIRE(bound_for(8, 3, {1, 2}, IterationSchedule::Full) == 131072);
}

TEST_CASE("transform-count bounds, top-only schedule", "[complexity]") {
    REQUIRE(bound_for(7, 3, {1, 16}, IterationSchedule::TopOnly) == 128);
    REQUIRE(bound_for(7, 3, {1, 8}, IterationSchedule::TopOnly) == 512);
    REQUIRE(bound_for(7, 3, {1, 4}, IterationSchedule::TopOnly) == 2048);
    REQUIRE(bound_for(7, 3, {1, 2}, IterationSchedule::TopOnly) == 8192);

    REQUIRE(bound_for(8, 3, {1, 16}, IterationSchedule::TopOnly) == 512);
    REQUIRE(bound_for(8, 3, {1, 8}, IterationSchedule::TopOnly) == 2048);
    REQUIRE(bound_for(8, 3, {1, 4}, IterationSchedule::TopOnly) == 8192);
    REQUIRE(bound_for(8, 3, {1, 2}, IterationSchedule::TopOnly) == 32768);
}

TEST_CASE("bound guards", "[complexity]") {
    REQUIRE_THROWS_AS(count_fht_bound(make_code(4, 1), default_config(DecoderVariant::Srpa)),
                      std::invalid_argument);
}

TEST_CASE("complexity gain", "[complexity]") {
    REQUIRE_THAT(complexity_gain(25046.0, 131072), WithinRel(0.8089141845703125, 1e-12));
    REQUIRE_THAT(complexity_gain(128.0, 384), WithinRel(2.0 / 3.0, 1e-12));
    REQUIRE(complexity_gain(500.0, 500) == 0.0);
    REQUIRE_THROWS_AS(complexity_gain(1.0, 0), std::invalid_argument);
}

TEST_CASE("instrumented counts never exceed the bound", "[complexity]") {
    const RmCode code = make_code(5, 2);
    std::mt19937_64 gen(4242);
    std::uniform_real_distribution<double> dist(-4.0, 4.0);

    std::vector<DecoderConfig> configs;
    configs.push_back(default_config(DecoderVariant::Rpa));
    {
        DecoderConfig cfg = default_config(DecoderVariant::Srpa);
        cfg.r_p = {1, 3};
        configs.push_back(cfg);
        cfg.fixed_subset = true;
        configs.push_back(cfg);
    }
    {
        DecoderConfig cfg = default_config(DecoderVariant::Sdss);
        cfg.r_p = {1, 3};
        cfg.r_q = 0.5;
        configs.push_back(cfg);
        cfg.schedule = IterationSchedule::Full;
        configs.push_back(cfg);
    }

    for (const DecoderConfig& cfg : configs) {
        const std::int64_t bound = count_fht_bound(code, cfg);
        for (int trial = 0; trial < 1000; ++trial) {
            LlrVector llr(32);
            for (double& v : llr) v = dist(gen);
            RngStream rng(5150, static_cast<std::uint64_t>(trial));
            const DecodeOutcome out = decode(llr, code, cfg, rng);
            REQUIRE(out.fht_count >= 1);
            REQUIRE(out.fht_count <= bound);
        }
    }
}
