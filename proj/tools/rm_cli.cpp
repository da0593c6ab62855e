// Benchmark front end for the projection-aggregation decoder library.
// Subcommands: simulate, sweep-rq, count-fht, subset-study, decode-one.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rmpa/channel.hpp"
#include "rmpa/complexity.hpp"
#include "rmpa/decoder.hpp"
#include "rmpa/harness.hpp"
#include "rmpa/rm_code.hpp"

namespace {

struct Usage : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::pair<int, int> parse_code(const std::string& text) {
    int m = 0, r = 0;
    char extra = 0;
    if (std::sscanf(text.c_str(), "%d,%d%c", &m, &r, &extra) != 2)
        throw Usage("--code expects m,r (e.g. 7,3), got '" + text + "'");
    return {m, r};
}

std::int64_t gcd64(std::int64_t a, std::int64_t b) { return b == 0 ? a : gcd64(b, a % b); }

// Accepts "num/den" or a plain decimal ("0.85", "1").
rmpa::Rational parse_rational(const std::string& text) {
    const std::size_t slash = text.find('/');
    std::int64_t num = 0, den = 1;
    try {
        if (slash != std::string::npos) {
            std::size_t used = 0;
            num = std::stoll(text.substr(0, slash), &used);
            if (used != slash) throw std::invalid_argument(text);
            den = std::stoll(text.substr(slash + 1), &used);
            if (used != text.size() - slash - 1) throw std::invalid_argument(text);
        } else {
            const std::size_t dot = text.find('.');
            if (dot == std::string::npos) {
                std::size_t used = 0;
                num = std::stoll(text, &used);
                if (used != text.size()) throw std::invalid_argument(text);
            } else {
                const std::string digits = text.substr(0, dot) + text.substr(dot + 1);
                std::size_t used = 0;
                num = std::stoll(digits, &used);
                if (used != digits.size()) throw std::invalid_argument(text);
                for (std::size_t i = dot + 1; i < text.size(); ++i) den *= 10;
            }
        }
    } catch (const std::exception&) {
        throw Usage("cannot parse rational '" + text + "'");
    }
    if (den <= 0 || num < 0) throw Usage("rational '" + text + "' out of range");
    if (num != 0) {
        const std::int64_t g = gcd64(num, den);
        num /= g;
        den /= g;
    }
    return {num, den};
}

double parse_real(const std::string& text) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw Usage("cannot parse number '" + text + "'");
    }
}

// "a:step:b" range, "x,y,z" list, or single value.
std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> values;
    if (text.find(':') != std::string::npos) {
        std::stringstream ss(text);
        std::string part;
        std::vector<double> abc;
        while (std::getline(ss, part, ':')) abc.push_back(parse_real(part));
        if (abc.size() != 3) throw Usage("range grid expects a:step:b, got '" + text + "'");
        const double a = abc[0], step = abc[1], b = abc[2];
        if (step <= 0.0 || b < a) throw Usage("bad range '" + text + "'");
        const auto count = static_cast<std::int64_t>((b - a) / step + 0.5);
        for (std::int64_t i = 0; i <= count; ++i) {
            const double v = a + static_cast<double>(i) * step;
            if (v > b + 1e-9) break;
            values.push_back(v);
        }
    } else {
        std::stringstream ss(text);
        std::string part;
        while (std::getline(ss, part, ',')) values.push_back(parse_real(part));
    }
    if (values.empty()) throw Usage("empty grid '" + text + "'");
    return values;
}

rmpa::DecoderVariant parse_variant(const std::string& name) {
    if (name == "rpa") return rmpa::DecoderVariant::Rpa;
    if (name == "srpa") return rmpa::DecoderVariant::Srpa;
    if (name == "sdss") return rmpa::DecoderVariant::Sdss;
    throw Usage("--decoder must be rpa, srpa or sdss, got '" + name + "'");
}

rmpa::IterationSchedule parse_schedule(const std::string& name) {
    if (name == "full") return rmpa::IterationSchedule::Full;
    if (name == "top-only") return rmpa::IterationSchedule::TopOnly;
    throw Usage("--schedule must be full or top-only, got '" + name + "'");
}

// Shared decoder flags; resolution fills variant-dependent defaults.
struct DecoderFlags {
    std::string decoder = "rpa";
    std::string rp = "1";
    std::string rq;        // default depends on the variant
    double theta = 0.05;
    std::string schedule;  // default depends on the variant
    bool fixed_subset = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--decoder", decoder, "Decoder variant: rpa | srpa | sdss")
            ->capture_default_str();
        cmd->add_option("--rp", rp, "Pruning factor r_p, rational like 1/32 or decimal")
            ->capture_default_str();
        cmd->add_option("--rq", rq,
                        "Selection factor r_q in [0,1]; default 0, or 0.85 for sdss");
        cmd->add_option("--theta", theta, "Convergence threshold")->capture_default_str();
        cmd->add_option("--schedule", schedule,
                        "Iteration schedule: full | top-only (default: top-only for sdss, "
                        "full otherwise)");
        cmd->add_flag("--fixed-subset", fixed_subset,
                      "srpa: keep one random subset per codeword instead of redrawing "
                      "every iteration");
    }

    rmpa::DecoderConfig resolve() const {
        rmpa::DecoderConfig cfg = rmpa::default_config(parse_variant(decoder));
        cfg.r_p = parse_rational(rp);
        if (!rq.empty()) cfg.r_q = parse_real(rq);
        if (cfg.r_q < 0.0 || cfg.r_q > 1.0) throw Usage("--rq must be in [0, 1]");
        if (theta < 0.0) throw Usage("--theta must be >= 0");
        cfg.theta = theta;
        if (!schedule.empty()) cfg.schedule = parse_schedule(schedule);
        cfg.fixed_subset = fixed_subset;
        if (cfg.variant == rmpa::DecoderVariant::Rpa && cfg.r_p.num != cfg.r_p.den)
            throw Usage("rpa uses every subspace; --rp must be 1");
        if (cfg.r_p.num <= 0 || cfg.r_p.num > cfg.r_p.den)
            throw Usage("--rp must be in (0, 1]");
        return cfg;
    }
};

std::string describe_decoder(const rmpa::DecoderConfig& cfg) {
    std::ostringstream out;
    out << "decoder=" << rmpa::decoder_name(cfg.variant) << " r_p=" << cfg.r_p.num << '/'
        << cfg.r_p.den << " r_q=" << rmpa::format_double(cfg.r_q) << " theta="
        << rmpa::format_double(cfg.theta) << " schedule=" << rmpa::schedule_name(cfg.schedule)
        << " fixed_subset=" << (cfg.fixed_subset ? "true" : "false");
    return out.str();
}

std::string describe_grid(const std::vector<rmpa::ChannelConfig>& grid) {
    std::ostringstream out;
    if (grid.front().kind == rmpa::ChannelKind::AwgnBpsk) {
        out << "channel=awgn-bpsk ebn0_db=[";
        for (std::size_t i = 0; i < grid.size(); ++i)
            out << (i ? "," : "") << rmpa::format_double(grid[i].ebn0_db);
        out << ']';
    } else {
        out << "channel=bsc crossover=[";
        for (std::size_t i = 0; i < grid.size(); ++i)
            out << (i ? "," : "") << rmpa::format_double(grid[i].crossover);
        out << ']';
    }
    return out.str();
}

void print_results_csv(std::ostream& out, const rmpa::SimJob& job,
                       const std::vector<rmpa::TrialBatchResult>& results) {
    out << rmpa::kCsvHeader << '\n';
    for (const auto& rec : rmpa::to_csv_records(job, results)) out << rmpa::csv_line(rec) << '\n';
}

int default_workers() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reed-Muller projection-aggregation decoding bench"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read flags from an INI/TOML config file");

    std::string code_arg;
    DecoderFlags dec_flags;

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo WER/BER over a channel grid");
    std::string sim_ebn0, sim_bsc, sim_out;
    std::int64_t sim_min_words = 100000, sim_min_errors = 400, sim_max_words = 10000000;
    bool sim_all_zero = false;
    std::uint64_t sim_seed = 0;
    int sim_workers = default_workers();
    simulate->add_option("--code", code_arg, "Code parameters m,r")->required();
    dec_flags.attach(simulate);
    simulate->add_option("--ebn0", sim_ebn0, "AWGN E_b/N_0 grid in dB: a:step:b, list or single");
    simulate->add_option("--bsc", sim_bsc, "BSC crossover grid: list or single");
    simulate->add_option("--min-words", sim_min_words, "Minimum words per point")
        ->capture_default_str();
    simulate->add_option("--min-errors", sim_min_errors, "Minimum word errors per point")
        ->capture_default_str();
    simulate->add_option("--max-words", sim_max_words, "Hard word cap per point")
        ->capture_default_str();
    simulate->add_flag("--all-zero", sim_all_zero, "Send the zero codeword (skip random messages)");
    simulate->add_option("--seed", sim_seed, "Master seed")->capture_default_str();
    simulate->add_option("--workers", sim_workers, "Worker threads")->capture_default_str();
    simulate->add_option("--out", sim_out, "CSV output path (JSON sidecar written next to it)");

    // sweep-rq
    auto* sweep = app.add_subcommand("sweep-rq", "Find the WER-minimizing r_q on one channel point");
    std::string sweep_ebn0 = "2.0", sweep_grid = "0:0.05:1", sweep_out;
    std::int64_t sweep_min_words = 100000, sweep_min_errors = 400, sweep_max_words = 10000000;
    bool sweep_all_zero = false;
    std::uint64_t sweep_seed = 0;
    int sweep_workers = default_workers();
    DecoderFlags sweep_dec;
    sweep_dec.decoder = "sdss";
    sweep->add_option("--code", code_arg, "Code parameters m,r")->required();
    sweep_dec.attach(sweep);
    sweep->add_option("--ebn0", sweep_ebn0, "Single AWGN E_b/N_0 point in dB")
        ->capture_default_str();
    sweep->add_option("--rq-grid", sweep_grid, "r_q grid: a:step:b or list")
        ->capture_default_str();
    sweep->add_option("--min-words", sweep_min_words, "Minimum words per r_q")
        ->capture_default_str();
    sweep->add_option("--min-errors", sweep_min_errors, "Minimum word errors per r_q")
        ->capture_default_str();
    sweep->add_option("--max-words", sweep_max_words, "Hard word cap per r_q")
        ->capture_default_str();
    sweep->add_flag("--all-zero", sweep_all_zero, "Send the zero codeword");
    sweep->add_option("--seed", sweep_seed, "Master seed (shared across r_q values)")
        ->capture_default_str();
    sweep->add_option("--workers", sweep_workers, "Worker threads")->capture_default_str();
    sweep->add_option("--out", sweep_out, "CSV output path");

    // count-fht
    auto* count = app.add_subcommand("count-fht", "Worst-case first-order decodes per codeword");
    DecoderFlags count_dec;
    count_dec.decoder = "srpa";
    count->add_option("--code", code_arg, "Code parameters m,r")->required();
    count_dec.attach(count);

    // subset-study
    auto* study = app.add_subcommand("subset-study",
                                     "Exhaustively decode all inputs under every fixed p-subset");
    int study_p = 0;
    double study_bsc = 0.1;
    int study_workers = default_workers();
    std::string study_out;
    study->add_option("--code", code_arg, "Code parameters m,r (n <= 16)")->required();
    study->add_option("--p", study_p, "Subset size p")->required();
    study->add_option("--bsc", study_bsc, "BSC crossover for the LLR magnitude")
        ->capture_default_str();
    study->add_option("--workers", study_workers, "Worker threads")->capture_default_str();
    study->add_option("--out", study_out, "Per-subset CSV output path");

    // decode-one
    auto* one = app.add_subcommand("decode-one", "Decode a single LLR vector");
    std::string one_llr;
    std::uint64_t one_seed = 0;
    DecoderFlags one_dec;
    one->add_option("--code", code_arg, "Code parameters m,r")->required();
    one->add_option("--llr", one_llr, "Comma-separated LLR values, length n")->required();
    one_dec.attach(one);
    one->add_option("--seed", one_seed, "Seed for randomized selection")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        const auto [m, r] = parse_code(code_arg);

        if (simulate->parsed() || sweep->parsed()) {
            const bool is_sweep = sweep->parsed();
            const DecoderFlags& flags = is_sweep ? sweep_dec : dec_flags;
            rmpa::SimJob job;
            job.m = m;
            job.r = r;
            job.decoder = flags.resolve();
            job.min_words = is_sweep ? sweep_min_words : sim_min_words;
            job.min_word_errors = is_sweep ? sweep_min_errors : sim_min_errors;
            job.max_words = is_sweep ? sweep_max_words : sim_max_words;
            job.all_zero = is_sweep ? sweep_all_zero : sim_all_zero;
            job.master_seed = is_sweep ? sweep_seed : sim_seed;
            job.workers = is_sweep ? sweep_workers : sim_workers;
            if (job.min_words < 1 || job.min_word_errors < 0 || job.max_words < job.min_words)
                throw Usage("need 1 <= --min-words <= --max-words and --min-errors >= 0");
            if (job.workers < 1) throw Usage("--workers must be >= 1");

            const rmpa::RmCode code = rmpa::make_code(m, r);
            if (code.r < 1) throw Usage("decoding needs r >= 1");
            const double rate = static_cast<double>(code.k) / static_cast<double>(code.n);

            if (is_sweep) {
                rmpa::ChannelConfig chan;
                chan.kind = rmpa::ChannelKind::AwgnBpsk;
                chan.ebn0_db = parse_real(sweep_ebn0);
                chan.rate = rate;
                job.grid = {chan};
                const std::vector<double> rq_grid = parse_grid(sweep_grid);
                for (double rq : rq_grid)
                    if (rq < 0.0 || rq > 1.0) throw Usage("--rq-grid values must be in [0, 1]");

                std::cerr << "config: subcommand=sweep-rq code=RM(" << m << ',' << r << ") "
                          << describe_decoder(job.decoder) << ' ' << describe_grid(job.grid)
                          << " rq_grid=" << sweep_grid << " min_words=" << job.min_words
                          << " min_errors=" << job.min_word_errors
                          << " max_words=" << job.max_words
                          << " all_zero=" << (job.all_zero ? "true" : "false")
                          << " seed=" << job.master_seed << " workers=" << job.workers
                          << " out=" << (sweep_out.empty() ? "-" : sweep_out) << '\n';

                const rmpa::SweepResult result = rmpa::sweep_rq(job, rq_grid);
                std::vector<rmpa::CsvRecord> records;
                for (const auto& entry : result.entries) {
                    rmpa::SimJob variant = job;
                    variant.decoder.r_q = entry.r_q;
                    records.push_back(
                        rmpa::to_csv_records(variant, {entry.result}).front());
                }
                std::cout << rmpa::kCsvHeader << '\n';
                for (const auto& rec : records) std::cout << rmpa::csv_line(rec) << '\n';
                const auto& best = result.entries[result.best_index];
                std::cout << "# best_rq=" << rmpa::format_double(best.r_q)
                          << " wer=" << rmpa::format_double(best.result.wer) << '\n';

                if (!sweep_out.empty()) {
                    std::ofstream csv(sweep_out, std::ios::binary);
                    if (!csv) throw std::runtime_error("cannot open " + sweep_out);
                    csv << rmpa::kCsvHeader << '\n';
                    for (const auto& rec : records) csv << rmpa::csv_line(rec) << '\n';
                    nlohmann::json sidecar = rmpa::job_to_json(job);
                    sidecar["rq_grid"] = rq_grid;
                    sidecar["best_rq"] = best.r_q;
                    std::ofstream js(rmpa::sidecar_path(sweep_out), std::ios::binary);
                    if (!js) throw std::runtime_error("cannot open sidecar for " + sweep_out);
                    js << sidecar.dump(2) << '\n';
                }
                return 0;
            }

            // simulate
            if (sim_ebn0.empty() == sim_bsc.empty())
                throw Usage("simulate needs exactly one of --ebn0 or --bsc");
            if (!sim_ebn0.empty()) {
                for (double point : parse_grid(sim_ebn0)) {
                    rmpa::ChannelConfig chan;
                    chan.kind = rmpa::ChannelKind::AwgnBpsk;
                    chan.ebn0_db = point;
                    chan.rate = rate;
                    job.grid.push_back(chan);
                }
            } else {
                for (double point : parse_grid(sim_bsc)) {
                    if (point <= 0.0 || point >= 0.5)
                        throw Usage("--bsc values must be in (0, 0.5)");
                    rmpa::ChannelConfig chan;
                    chan.kind = rmpa::ChannelKind::Bsc;
                    chan.crossover = point;
                    chan.rate = rate;
                    job.grid.push_back(chan);
                }
            }

            std::cerr << "config: subcommand=simulate code=RM(" << m << ',' << r << ") "
                      << describe_decoder(job.decoder) << ' ' << describe_grid(job.grid)
                      << " min_words=" << job.min_words << " min_errors=" << job.min_word_errors
                      << " max_words=" << job.max_words
                      << " all_zero=" << (job.all_zero ? "true" : "false")
                      << " seed=" << job.master_seed << " workers=" << job.workers
                      << " out=" << (sim_out.empty() ? "-" : sim_out) << '\n';

            const std::vector<rmpa::TrialBatchResult> results = rmpa::run_job(job);
            print_results_csv(std::cout, job, results);
            for (const auto& res : results)
                if (res.capped)
                    std::cerr << "warning: word cap hit before the error target at "
                              << (res.channel.kind == rmpa::ChannelKind::AwgnBpsk
                                      ? "ebn0_db=" + rmpa::format_double(res.channel.ebn0_db)
                                      : "crossover=" +
                                            rmpa::format_double(res.channel.crossover))
                              << '\n';
            if (!sim_out.empty()) rmpa::persist(job, results, sim_out);
            return 0;
        }

        if (count->parsed()) {
            const rmpa::DecoderConfig cfg = count_dec.resolve();
            const rmpa::RmCode code = rmpa::make_code(m, r);
            if (code.r < 2) throw Usage("count-fht needs r >= 2");
            std::cerr << "config: subcommand=count-fht code=RM(" << m << ',' << r << ") "
                      << describe_decoder(cfg) << '\n';
            std::cout << rmpa::count_fht_bound(code, cfg) << '\n';
            return 0;
        }

        if (study->parsed()) {
            if (study_workers < 1) throw Usage("--workers must be >= 1");
            rmpa::ChannelConfig chan;
            chan.kind = rmpa::ChannelKind::Bsc;
            chan.crossover = study_bsc;
            if (chan.crossover <= 0.0 || chan.crossover >= 0.5)
                throw Usage("--bsc must be in (0, 0.5)");
            std::cerr << "config: subcommand=subset-study code=RM(" << m << ',' << r
                      << ") p=" << study_p << " bsc=" << rmpa::format_double(study_bsc)
                      << " workers=" << study_workers
                      << " out=" << (study_out.empty() ? "-" : study_out) << '\n';
            const rmpa::SubsetStudyResult result =
                rmpa::subset_study(m, r, study_p, chan, study_workers);

            std::int64_t lo = result.error_counts.front(), hi = lo, sum = 0;
            for (std::int64_t c : result.error_counts) {
                lo = std::min(lo, c);
                hi = std::max(hi, c);
                sum += c;
            }
            std::cout << "subsets=" << result.subsets.size() << " min_errors=" << lo
                      << " max_errors=" << hi << " mean_errors="
                      << rmpa::format_double(static_cast<double>(sum) /
                                             static_cast<double>(result.error_counts.size()))
                      << '\n';
            std::cout << "histogram (word_errors -> subsets):" << '\n';
            for (const auto& [errors, count_subsets] : result.histogram)
                std::cout << "  " << errors << " -> " << count_subsets << '\n';

            if (!study_out.empty()) {
                std::ofstream csv(study_out, std::ios::binary);
                if (!csv) throw std::runtime_error("cannot open " + study_out);
                csv << "subset,word_errors\n";
                for (std::size_t i = 0; i < result.subsets.size(); ++i) {
                    for (std::size_t j = 0; j < result.subsets[i].size(); ++j)
                        csv << (j ? "-" : "") << result.subsets[i][j];
                    csv << ',' << result.error_counts[i] << '\n';
                }
            }
            return 0;
        }

        if (one->parsed()) {
            const rmpa::DecoderConfig cfg = one_dec.resolve();
            const rmpa::RmCode code = rmpa::make_code(m, r);
            if (code.r < 1) throw Usage("decoding needs r >= 1");
            rmpa::LlrVector llr;
            for (double v : parse_grid(one_llr)) llr.push_back(v);
            if (static_cast<int>(llr.size()) != code.n)
                throw Usage("--llr must have exactly n = " + std::to_string(code.n) +
                            " values");
            std::cerr << "config: subcommand=decode-one code=RM(" << m << ',' << r << ") "
                      << describe_decoder(cfg) << " seed=" << one_seed << '\n';
            rmpa::RngStream rng(one_seed, 0);
            const rmpa::DecodeOutcome out = rmpa::decode(llr, code, cfg, rng);
            std::string bits(out.codeword.size(), '0');
            for (std::size_t z = 0; z < out.codeword.size(); ++z)
                if (out.codeword[z]) bits[z] = '1';
            std::cout << bits << '\n';
            std::cerr << "iterations=" << out.iterations_used << " fht_count=" << out.fht_count
                      << " converged=" << (out.converged ? "true" : "false") << '\n';
            return 0;
        }

        throw Usage("no subcommand selected");
    } catch (const Usage& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
