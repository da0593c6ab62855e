#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include <json.hpp>

#include "rmpa/harness.hpp"

using namespace rmpa;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

struct TempDir {
    std::filesystem::path dir;
    TempDir() {
        dir = std::filesystem::temp_directory_path() /
              ("rmpa_test_" + std::to_string(std::rand()) + std::to_string(std::rand()));
        std::filesystem::create_directories(dir);
    }
    ~TempDir() { std::filesystem::remove_all(dir); }
    std::string path(const std::string& name) const { return (dir / name).string(); }
};

SimJob awgn_job(int m, int r, DecoderVariant variant, double ebn0_db) {
    SimJob job;
    job.m = m;
    job.r = r;
    job.decoder = default_config(variant);
    ChannelConfig chan;
    chan.kind = ChannelKind::AwgnBpsk;
    chan.ebn0_db = ebn0_db;
    job.grid = {chan};
    return job;
}

}  // namespace

TEST_CASE("wilson interval", "[harness]") {
    const auto [lo, hi] = wilson_interval(10, 10000);
    REQUIRE_THAT(lo, WithinRel(0.0005432859864972463, 1e-9));
    REQUIRE_THAT(hi, WithinRel(0.0018399443874379962, 1e-9));
    REQUIRE(lo <= 0.001);
    REQUIRE(0.001 <= hi);

    REQUIRE(wilson_interval(0, 100).first == 0.0);
    REQUIRE(wilson_interval(100, 100).second == 1.0);
    const auto [zlo, zhi] = wilson_interval(0, 100);
    REQUIRE(zhi > 0.0);

    REQUIRE_THROWS_AS(wilson_interval(5, 0), std::invalid_argument);
    REQUIRE_THROWS_AS(wilson_interval(5, 4), std::invalid_argument);
    REQUIRE_THROWS_AS(wilson_interval(-1, 4), std::invalid_argument);
}

TEST_CASE("parallel_for covers the range once", "[harness]") {
    std::vector<int> hits(1000, 0);
    parallel_for(0, 1000, 7, [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t i = lo; i < hi; ++i) ++hits[static_cast<std::size_t>(i)];
    });
    REQUIRE(std::accumulate(hits.begin(), hits.end(), 0) == 1000);
    REQUIRE(*std::min_element(hits.begin(), hits.end()) == 1);
}

TEST_CASE("noiseless run has zero error rates", "[harness]") {
    SimJob job = awgn_job(3, 1, DecoderVariant::Rpa, 100.0);
    job.min_words = 512;
    job.min_word_errors = 0;
    job.max_words = 512;
    const auto results = run_job(job);
    REQUIRE(results.size() == 1);
    REQUIRE(results[0].words == 512);
    REQUIRE(results[0].word_errors == 0);
    REQUIRE(results[0].wer == 0.0);
    REQUIRE(results[0].ber == 0.0);
    REQUIRE_FALSE(results[0].capped);
    REQUIRE(results[0].mean_iterations == 1.0);
}

TEST_CASE("results are identical across worker counts and replays", "[harness]") {
    SimJob job = awgn_job(4, 2, DecoderVariant::Sdss, 2.0);
    job.decoder.r_p = {1, 3};
    job.min_words = 1024;
    job.min_word_errors = 0;
    job.max_words = 1024;
    job.master_seed = 99;

    job.workers = 1;
    const auto solo = run_job(job);
    job.workers = 3;
    const auto triple = run_job(job);
    job.workers = 8;
    const auto octet = run_job(job);

    for (const auto& other : {triple, octet}) {
        REQUIRE(other[0].words == solo[0].words);
        REQUIRE(other[0].word_errors == solo[0].word_errors);
        REQUIRE(other[0].bit_errors == solo[0].bit_errors);
        REQUIRE(other[0].wer == solo[0].wer);
        REQUIRE(other[0].ber == solo[0].ber);
        REQUIRE(other[0].mean_fht == solo[0].mean_fht);
        REQUIRE(other[0].mean_iterations == solo[0].mean_iterations);
    }
}

TEST_CASE("stop rule and cap flag", "[harness]") {
    SECTION("cap hit before the error target") {
        SimJob job = awgn_job(3, 1, DecoderVariant::Rpa, 100.0);
        job.min_words = 256;
        job.min_word_errors = 10;  // unreachable, channel is noiseless
        job.max_words = 512;
        const auto results = run_job(job);
        REQUIRE(results[0].words == 512);
        REQUIRE(results[0].capped);
    }
    SECTION("error target reached at the word minimum") {
        SimJob job = awgn_job(3, 1, DecoderVariant::Rpa, 0.0);
        job.min_words = 256;
        job.min_word_errors = 10;
        job.max_words = 100000;
        const auto results = run_job(job);
        REQUIRE(results[0].words >= 256);
        REQUIRE(results[0].word_errors >= 10);
        REQUIRE_FALSE(results[0].capped);
        REQUIRE(results[0].wer > 0.0);
        REQUIRE(results[0].wer_ci_lo <= results[0].wer);
        REQUIRE(results[0].wer <= results[0].wer_ci_hi);
    }
    SECTION("bad budgets rejected") {
        SimJob job = awgn_job(3, 1, DecoderVariant::Rpa, 1.0);
        job.min_words = 100;
        job.max_words = 50;
        REQUIRE_THROWS_AS(run_job(job), std::invalid_argument);
        job.max_words = 100;
        job.grid.clear();
        REQUIRE_THROWS_AS(run_job(job), std::invalid_argument);
    }
}

TEST_CASE("lower noise means fewer errors", "[harness]") {
    SimJob job = awgn_job(6, 2, DecoderVariant::Rpa, 0.0);
    job.grid.clear();
    for (double db : {1.0, 3.0}) {
        ChannelConfig chan;
        chan.kind = ChannelKind::AwgnBpsk;
        chan.ebn0_db = db;
        job.grid.push_back(chan);
    }
    job.min_words = 10240;
    job.min_word_errors = 0;
    job.max_words = 10240;
    job.master_seed = 7;
    const auto results = run_job(job);
    REQUIRE(results.size() == 2);
    REQUIRE(results[1].wer < results[0].wer);
    REQUIRE(results[1].wer_ci_hi < results[0].wer_ci_lo);
}

TEST_CASE("r_q sweep", "[harness]") {
    SimJob job = awgn_job(4, 2, DecoderVariant::Sdss, 2.0);
    job.decoder.r_p = {1, 3};
    job.min_words = 512;
    job.min_word_errors = 0;
    job.max_words = 512;
    job.master_seed = 11;

    SECTION("single-point grid equals a direct run") {
        const SweepResult sweep = sweep_rq(job, {0.85});
        REQUIRE(sweep.entries.size() == 1);
        REQUIRE(sweep.best_index == 0);

        SimJob direct = job;
        direct.decoder.r_q = 0.85;
        const auto results = run_job(direct);
        REQUIRE(sweep.entries[0].result.word_errors == results[0].word_errors);
        REQUIRE(sweep.entries[0].result.mean_fht == results[0].mean_fht);
    }
    SECTION("argmin picks the lowest observed error rate") {
        const SweepResult sweep = sweep_rq(job, {0.0, 0.5, 1.0});
        REQUIRE(sweep.entries.size() == 3);
        for (const auto& entry : sweep.entries)
            REQUIRE(sweep.entries[sweep.best_index].result.wer <= entry.result.wer);
    }
    SECTION("guards") {
        REQUIRE_THROWS_AS(sweep_rq(job, {}), std::invalid_argument);
        SimJob two_points = job;
        two_points.grid.push_back(two_points.grid[0]);
        REQUIRE_THROWS_AS(sweep_rq(two_points, {0.5}), std::invalid_argument);
    }
}

TEST_CASE("subset study", "[harness]") {
    ChannelConfig bsc;
    bsc.kind = ChannelKind::Bsc;
    bsc.crossover = 0.1;

    SECTION("small smoke run covers every subset") {
        const SubsetStudyResult study = subset_study(3, 2, 2, bsc, 2);
        REQUIRE(study.subsets.size() == 21);  // C(7,2)
        REQUIRE(study.error_counts.size() == 21);
        REQUIRE(study.subsets.front() == std::vector<SubspaceId>{1, 2});
        REQUIRE(study.subsets.back() == std::vector<SubspaceId>{6, 7});
        int histogram_total = 0;
        for (const auto& [errors, count] : study.histogram) {
            REQUIRE(errors >= 0);
            REQUIRE(errors < 256);  // the all-zero input always decodes correctly
            histogram_total += count;
        }
        REQUIRE(histogram_total == 21);
    }
    SECTION("guards") {
        ChannelConfig awgn;
        awgn.kind = ChannelKind::AwgnBpsk;
        REQUIRE_THROWS_AS(subset_study(3, 2, 2, awgn, 1), std::invalid_argument);
        REQUIRE_THROWS_AS(subset_study(5, 2, 2, bsc, 1), std::invalid_argument);
        REQUIRE_THROWS_AS(subset_study(4, 2, 7, bsc, 1), std::invalid_argument);  // C(15,7) too big
        REQUIRE_THROWS_AS(subset_study(3, 2, 0, bsc, 1), std::invalid_argument);
    }
}

TEST_CASE("persistence", "[harness]") {
    TempDir tmp;

    SimJob job = awgn_job(7, 2, DecoderVariant::Sdss, 2.0);
    job.decoder.r_p = {1, 32};
    job.master_seed = 42;

    SECTION("sidecar path derivation") {
        REQUIRE(sidecar_path("results.csv") == "results.json");
        REQUIRE(sidecar_path("out") == "out.json");
        REQUIRE(sidecar_path("dir.v1/out") == "dir.v1/out.json");
        REQUIRE(sidecar_path("dir/out.csv") == "dir/out.json");
    }
    SECTION("empty result list gives a header-only file") {
        const std::string path = tmp.path("empty.csv");
        persist(job, {}, path);
        REQUIRE(slurp(path) == std::string(kCsvHeader) + "\n");
        REQUIRE(load_results_csv(path).empty());
    }
    SECTION("one grid point gives two lines") {
        TrialBatchResult res;
        res.channel = job.grid[0];
        res.words = 100000;
        res.word_errors = 7450;
        res.bit_errors = 31000;
        res.wer = 0.0745;
        res.ber = 31000.0 / (100000.0 * 128.0);
        std::tie(res.wer_ci_lo, res.wer_ci_hi) = wilson_interval(7450, 100000);
        res.mean_fht = 11.93;
        res.mean_iterations = 2.4817;
        const std::string path = tmp.path("one.csv");
        persist(job, {res}, path);
        const std::string text = slurp(path);
        REQUIRE(std::count(text.begin(), text.end(), '\n') == 2);
        REQUIRE(text.find("\"RM(7,2)\",sdss,1/32,0.85,2,100000,7450,0.0745,") !=
                std::string::npos);
    }
    SECTION("round trip preserves every field") {
        std::vector<TrialBatchResult> results;
        double wer_samples[] = {0.0745, 1e-7, 1.0 / 3.0};
        for (double wer : wer_samples) {
            TrialBatchResult res;
            res.channel = job.grid[0];
            res.words = 300000;
            res.word_errors = static_cast<std::int64_t>(wer * 300000);
            res.bit_errors = res.word_errors * 3;
            res.wer = wer;
            res.ber = wer / 128.0;
            std::tie(res.wer_ci_lo, res.wer_ci_hi) =
                wilson_interval(res.word_errors, res.words);
            res.mean_fht = 4096.0 * wer + 0.1;
            res.mean_iterations = 1.0 + wer;
            results.push_back(res);
        }
        const std::string path = tmp.path("round.csv");
        persist(job, results, path);
        const auto loaded = load_results_csv(path);
        const auto expected = to_csv_records(job, results);
        REQUIRE(loaded == expected);

        // identical inputs, identical bytes
        const std::string again = tmp.path("round2.csv");
        persist(job, results, again);
        REQUIRE(slurp(path) == slurp(again));
        REQUIRE(slurp(sidecar_path(path)) == slurp(sidecar_path(again)));
    }
    SECTION("sidecar holds the job configuration") {
        const std::string path = tmp.path("job.csv");
        persist(job, {}, path);
        const nlohmann::json sidecar = nlohmann::json::parse(slurp(sidecar_path(path)));
        REQUIRE(sidecar["code"]["m"] == 7);
        REQUIRE(sidecar["code"]["r"] == 2);
        REQUIRE(sidecar["decoder"]["variant"] == "sdss");
        REQUIRE(sidecar["decoder"]["r_p"] == "1/32");
        REQUIRE(sidecar["decoder"]["schedule"] == "top-only");
        REQUIRE(sidecar["master_seed"] == 42);
        REQUIRE(sidecar["channel_grid"][0]["kind"] == "awgn-bpsk");
        REQUIRE_THAT(sidecar["channel_grid"][0]["rate"].get<double>(),
                     WithinRel(29.0 / 128.0, 1e-12));
        REQUIRE(!sidecar.contains("workers"));
    }
    SECTION("doubles survive the text format exactly") {
        for (double v : {0.1, 1.0 / 3.0, 7.45e-2, 1e-300, 0.0, 123456789.0, 5e-324}) {
            const std::string text = format_double(v);
            double parsed = 0.0;
            REQUIRE(std::from_chars(text.data(), text.data() + text.size(), parsed).ec ==
                    std::errc{});
            REQUIRE(parsed == v);
        }
    }
}
