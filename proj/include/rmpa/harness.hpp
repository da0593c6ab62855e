#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rmpa/channel.hpp"
#include "rmpa/complexity.hpp"
#include "rmpa/decoder.hpp"
#include "rmpa/rm_code.hpp"

namespace rmpa {

// Static range split across a small thread pool; the calling thread takes the
// first chunk. body(lo, hi) must not touch another chunk's state.
template <typename Fn>
inline void parallel_for(std::int64_t begin, std::int64_t end, int workers, Fn&& body) {
    const std::int64_t total = end - begin;
    if (total <= 0) return;
    const int pool_size = static_cast<int>(
        std::min<std::int64_t>(std::max(workers, 1), total));
    if (pool_size == 1) {
        body(begin, end);
        return;
    }
    const std::int64_t chunk = (total + pool_size - 1) / pool_size;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(pool_size - 1));
    for (int w = 1; w < pool_size; ++w) {
        const std::int64_t lo = begin + w * chunk;
        const std::int64_t hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] { body(lo, hi); });
    }
    body(begin, std::min(end, begin + chunk));
    for (auto& t : pool) t.join();
}

struct SimJob {
    int m = 3;
    int r = 1;
    DecoderConfig decoder;
    std::vector<ChannelConfig> grid;
    std::int64_t min_words = 100000;
    std::int64_t min_word_errors = 400;
    std::int64_t max_words = 10000000;  // hard cap; hitting it flags the point
    bool all_zero = false;              // skip random messages, send the zero codeword
    std::uint64_t master_seed = 0;
    int workers = 1;
};

struct TrialBatchResult {
    ChannelConfig channel;
    std::int64_t words = 0;
    std::int64_t word_errors = 0;
    std::int64_t bit_errors = 0;
    double wer = 0.0;
    double ber = 0.0;
    double wer_ci_lo = 0.0;
    double wer_ci_hi = 0.0;
    double mean_fht = 0.0;
    double mean_iterations = 0.0;
    bool capped = false;  // stopped by max_words before the error target
};

// 95% Wilson score interval; always contains errors/trials.
inline std::pair<double, double> wilson_interval(std::int64_t errors, std::int64_t trials) {
    if (trials <= 0) throw std::invalid_argument("wilson_interval: trials must be positive");
    if (errors < 0 || errors > trials)
        throw std::invalid_argument("wilson_interval: errors out of range");
    const double z = 1.959963984540054;
    const double n = static_cast<double>(trials);
    const double ph = static_cast<double>(errors) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (ph + z2 / (2.0 * n)) / denom;
    const double half = z / denom * std::sqrt(ph * (1.0 - ph) / n + z2 / (4.0 * n * n));
    // At the boundaries center - half is zero (resp. one) analytically; pin it
    // so rounding noise cannot leak into the interval.
    const double lo = errors == 0 ? 0.0 : std::max(0.0, center - half);
    const double hi = errors == trials ? 1.0 : std::min(1.0, center + half);
    return {lo, hi};
}

namespace detail {

// Trials are dispatched in fixed-size waves; the stop rule is evaluated only
// at wave boundaries, so the set of simulated trials never depends on the
// worker count.
constexpr std::int64_t kWaveSize = 256;

struct TrialRecord {
    std::uint8_t word_error = 0;
    std::int32_t bit_errors = 0;
    std::int64_t fht_count = 0;
    std::int32_t iterations = 0;
};

inline TrialRecord run_trial(const RmCode& code, const DecoderConfig& dec,
                             const ChannelConfig& chan, bool all_zero,
                             std::uint64_t master_seed, std::uint64_t stream_id) {
    RngStream rng(master_seed, stream_id);
    std::vector<std::uint8_t> message(static_cast<std::size_t>(code.k), 0);
    if (!all_zero)
        for (auto& bit : message) bit = static_cast<std::uint8_t>(rng.next_u64() >> 63);
    const Codeword sent = encode(code, message);
    const LlrVector llr = transmit(sent, chan, rng);
    const DecodeOutcome out = decode(llr, code, dec, rng);

    TrialRecord rec;
    for (int z = 0; z < code.n; ++z)
        rec.bit_errors += out.codeword[static_cast<std::size_t>(z)] !=
                          sent[static_cast<std::size_t>(z)];
    rec.word_error = rec.bit_errors != 0;
    rec.fht_count = out.fht_count;
    rec.iterations = out.iterations_used;
    return rec;
}

}  // namespace detail

// Monte Carlo estimation per grid point. Each point runs until min_words and
// min_word_errors are both met, or max_words is hit (flagged as capped).
// Every trial owns RNG substream (point_index << 32) | trial_index, so
// results are identical for any worker count and common random numbers hold
// across configs sharing a master seed.
inline std::vector<TrialBatchResult> run_job(const SimJob& job) {
    if (job.grid.empty()) throw std::invalid_argument("run_job: empty channel grid");
    if (job.min_words < 1 || job.max_words < job.min_words)
        throw std::invalid_argument("run_job: bad word budget");
    const RmCode code = make_code(job.m, job.r);
    validate_config(job.decoder, code.m);

    std::vector<TrialBatchResult> results;
    results.reserve(job.grid.size());

    for (std::size_t point = 0; point < job.grid.size(); ++point) {
        ChannelConfig chan = job.grid[point];
        chan.rate = static_cast<double>(code.k) / static_cast<double>(code.n);
        std::int64_t words = 0, word_errors = 0, bit_errors = 0;
        std::int64_t fht_total = 0, iter_total = 0;

        std::vector<detail::TrialRecord> wave(static_cast<std::size_t>(detail::kWaveSize));
        while (true) {
            const std::int64_t wave_size = std::min(detail::kWaveSize, job.max_words - words);
            if (wave_size <= 0) break;
            const std::int64_t first = words;
            parallel_for(0, wave_size, job.workers, [&](std::int64_t lo, std::int64_t hi) {
                for (std::int64_t i = lo; i < hi; ++i) {
                    const std::uint64_t stream =
                        (static_cast<std::uint64_t>(point) << 32) |
                        static_cast<std::uint64_t>(first + i);
                    wave[static_cast<std::size_t>(i)] = detail::run_trial(
                        code, job.decoder, chan, job.all_zero, job.master_seed, stream);
                }
            });
            for (std::int64_t i = 0; i < wave_size; ++i) {
                const auto& rec = wave[static_cast<std::size_t>(i)];
                word_errors += rec.word_error;
                bit_errors += rec.bit_errors;
                fht_total += rec.fht_count;
                iter_total += rec.iterations;
            }
            words += wave_size;
            if (words >= job.min_words && word_errors >= job.min_word_errors) break;
        }

        TrialBatchResult res;
        res.channel = chan;
        res.words = words;
        res.word_errors = word_errors;
        res.bit_errors = bit_errors;
        res.wer = static_cast<double>(word_errors) / static_cast<double>(words);
        res.ber = static_cast<double>(bit_errors) / static_cast<double>(words * code.n);
        std::tie(res.wer_ci_lo, res.wer_ci_hi) = wilson_interval(word_errors, words);
        res.mean_fht = static_cast<double>(fht_total) / static_cast<double>(words);
        res.mean_iterations = static_cast<double>(iter_total) / static_cast<double>(words);
        res.capped = !(words >= job.min_words && word_errors >= job.min_word_errors);
        results.push_back(std::move(res));
    }
    return results;
}

struct SweepEntry {
    double r_q = 0.0;
    TrialBatchResult result;
};

struct SweepResult {
    std::vector<SweepEntry> entries;  // grid order
    std::size_t best_index = 0;       // argmin WER, first on ties
};

// Runs the job once per r_q value with a shared master seed; identical
// substreams mean identical messages and noise per trial index, so the WER
// comparison across r_q values uses common random numbers.
inline SweepResult sweep_rq(const SimJob& job, const std::vector<double>& rq_grid) {
    if (job.grid.size() != 1)
        throw std::invalid_argument("sweep_rq: needs exactly one channel grid point");
    if (rq_grid.empty()) throw std::invalid_argument("sweep_rq: empty r_q grid");
    SweepResult sweep;
    sweep.entries.reserve(rq_grid.size());
    for (double rq : rq_grid) {
        SimJob variant = job;
        variant.decoder.r_q = rq;
        std::vector<TrialBatchResult> res = run_job(variant);
        sweep.entries.push_back({rq, std::move(res.front())});
    }
    for (std::size_t i = 1; i < sweep.entries.size(); ++i)
        if (sweep.entries[i].result.wer < sweep.entries[sweep.best_index].result.wer)
            sweep.best_index = i;
    return sweep;
}

struct SubsetStudyResult {
    std::vector<std::vector<SubspaceId>> subsets;  // lexicographic order
    std::vector<std::int64_t> error_counts;        // aligned with subsets
    std::map<std::int64_t, int> histogram;         // error count -> subset count
};

namespace detail {

inline std::vector<std::vector<SubspaceId>> p_subsets(int universe, int p) {
    std::vector<std::vector<SubspaceId>> out;
    std::vector<int> idx(static_cast<std::size_t>(p));
    for (int i = 0; i < p; ++i) idx[static_cast<std::size_t>(i)] = i + 1;
    while (true) {
        std::vector<SubspaceId> subset(idx.begin(), idx.end());
        out.push_back(std::move(subset));
        int j = p - 1;
        while (j >= 0 && idx[static_cast<std::size_t>(j)] == universe - (p - 1 - j)) --j;
        if (j < 0) break;
        ++idx[static_cast<std::size_t>(j)];
        for (int t = j + 1; t < p; ++t)
            idx[static_cast<std::size_t>(t)] = idx[static_cast<std::size_t>(t - 1)] + 1;
    }
    return out;
}

}  // namespace detail

// Exhaustive desk study: decode every possible hard-decision input under each
// fixed p-subset decoder and count the words that fail to decode to the zero
// codeword (the all-zero word is what a symmetric channel argument assumes
// transmitted). Deterministic; exposes any tie-breaking asymmetry between
// subsets in the histogram.
inline SubsetStudyResult subset_study(int m, int r, int p, const ChannelConfig& chan,
                                      int workers) {
    if (chan.kind != ChannelKind::Bsc)
        throw std::invalid_argument("subset_study: channel must be BSC");
    const RmCode code = make_code(m, r);
    if (code.r < 1) throw std::invalid_argument("subset_study: order must be >= 1");
    if (code.n > 16) throw std::invalid_argument("subset_study: n must be <= 16");
    if (p < 1 || p > code.n - 1) throw std::invalid_argument("subset_study: p out of range");
    {
        // C(n-1, p) guard
        long double combos = 1.0L;
        for (int i = 1; i <= p; ++i)
            combos = combos * static_cast<long double>(code.n - p + i - 1) / i;
        if (combos > 1000.0L)
            throw std::invalid_argument("subset_study: too many subsets (limit 1000)");
    }

    SubsetStudyResult study;
    study.subsets = detail::p_subsets(code.n - 1, p);
    study.error_counts.assign(study.subsets.size(), 0);

    const double mag = bsc_llr_magnitude(chan);
    const Codeword zero(static_cast<std::size_t>(code.n), 0);
    const std::int64_t total_inputs = std::int64_t{1} << code.n;

    parallel_for(0, static_cast<std::int64_t>(study.subsets.size()), workers,
                 [&](std::int64_t lo, std::int64_t hi) {
                     for (std::int64_t s = lo; s < hi; ++s) {
                         DecoderConfig cfg = default_config(DecoderVariant::Srpa);
                         cfg.r_p = {p, code.n - 1};
                         cfg.forced_top_subset = study.subsets[static_cast<std::size_t>(s)];
                         RngStream rng(0x5eedu, static_cast<std::uint64_t>(s));
                         LlrVector llr(static_cast<std::size_t>(code.n));
                         std::int64_t errors = 0;
                         for (std::int64_t y = 0; y < total_inputs; ++y) {
                             for (int z = 0; z < code.n; ++z)
                                 llr[static_cast<std::size_t>(z)] =
                                     (y >> z) & 1 ? -mag : mag;
                             const DecodeOutcome out = decode(llr, code, cfg, rng);
                             errors += out.codeword != zero;
                         }
                         study.error_counts[static_cast<std::size_t>(s)] = errors;
                     }
                 });

    for (std::int64_t count : study.error_counts) ++study.histogram[count];
    return study;
}

// Shortest decimal form that parses back to the identical double.
inline std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

inline std::string decoder_name(DecoderVariant variant) {
    switch (variant) {
        case DecoderVariant::Rpa: return "rpa";
        case DecoderVariant::Srpa: return "srpa";
        case DecoderVariant::Sdss: return "sdss";
    }
    return "?";
}

inline std::string schedule_name(IterationSchedule schedule) {
    return schedule == IterationSchedule::Full ? "full" : "top-only";
}

struct CsvRecord {
    std::string code;     // e.g. "RM(7,2)"
    std::string decoder;  // rpa | srpa | sdss
    std::string r_p;      // exact rational, e.g. "1/32"
    double r_q = 0.0;
    double ebn0_db = 0.0;  // BSC rows carry the crossover here
    std::int64_t words = 0;
    std::int64_t word_errors = 0;
    double wer = 0.0;
    double wer_ci_lo = 0.0;
    double wer_ci_hi = 0.0;
    double ber = 0.0;
    double mean_fht = 0.0;
    double mean_iters = 0.0;
    std::uint64_t seed = 0;

    bool operator==(const CsvRecord&) const = default;
};

inline const char* kCsvHeader =
    "code,decoder,r_p,r_q,ebn0_db,words,word_errors,wer,wer_ci_lo,wer_ci_hi,ber,"
    "mean_fht,mean_iters,seed";

inline std::vector<CsvRecord> to_csv_records(const SimJob& job,
                                             const std::vector<TrialBatchResult>& results) {
    std::vector<CsvRecord> records;
    records.reserve(results.size());
    for (const auto& res : results) {
        CsvRecord rec;
        rec.code = "RM(" + std::to_string(job.m) + "," + std::to_string(job.r) + ")";
        rec.decoder = decoder_name(job.decoder.variant);
        rec.r_p = std::to_string(job.decoder.r_p.num) + "/" + std::to_string(job.decoder.r_p.den);
        rec.r_q = job.decoder.r_q;
        rec.ebn0_db = res.channel.kind == ChannelKind::AwgnBpsk ? res.channel.ebn0_db
                                                                : res.channel.crossover;
        rec.words = res.words;
        rec.word_errors = res.word_errors;
        rec.wer = res.wer;
        rec.wer_ci_lo = res.wer_ci_lo;
        rec.wer_ci_hi = res.wer_ci_hi;
        rec.ber = res.ber;
        rec.mean_fht = res.mean_fht;
        rec.mean_iters = res.mean_iterations;
        rec.seed = job.master_seed;
        records.push_back(std::move(rec));
    }
    return records;
}

inline std::string csv_line(const CsvRecord& rec) {
    std::ostringstream line;
    line << '"' << rec.code << '"' << ',' << rec.decoder << ',' << rec.r_p << ','
         << format_double(rec.r_q) << ',' << format_double(rec.ebn0_db) << ',' << rec.words
         << ',' << rec.word_errors << ',' << format_double(rec.wer) << ','
         << format_double(rec.wer_ci_lo) << ',' << format_double(rec.wer_ci_hi) << ','
         << format_double(rec.ber) << ',' << format_double(rec.mean_fht) << ','
         << format_double(rec.mean_iters) << ',' << rec.seed;
    return line.str();
}

inline std::string sidecar_path(const std::string& csv_path) {
    const std::size_t slash = csv_path.find_last_of('/');
    const std::size_t dot = csv_path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return csv_path + ".json";
    return csv_path.substr(0, dot) + ".json";
}

inline nlohmann::json job_to_json(const SimJob& job) {
    double rate = 0.0;
    for (int i = 0; i <= job.r; ++i) rate += static_cast<double>(binomial(job.m, i));
    rate /= static_cast<double>(std::int64_t{1} << job.m);
    nlohmann::json grid = nlohmann::json::array();
    for (const auto& chan : job.grid) {
        nlohmann::json point;
        point["kind"] = chan.kind == ChannelKind::AwgnBpsk ? "awgn-bpsk" : "bsc";
        if (chan.kind == ChannelKind::AwgnBpsk) {
            point["ebn0_db"] = chan.ebn0_db;
            point["rate"] = rate;
        } else {
            point["crossover"] = chan.crossover;
        }
        point["llr_cap"] = chan.llr_cap;
        grid.push_back(std::move(point));
    }
    nlohmann::json j;
    j["code"] = {{"m", job.m}, {"r", job.r}};
    j["decoder"] = {{"variant", decoder_name(job.decoder.variant)},
                    {"r_p", std::to_string(job.decoder.r_p.num) + "/" +
                                std::to_string(job.decoder.r_p.den)},
                    {"r_q", job.decoder.r_q},
                    {"theta", job.decoder.theta},
                    {"schedule", schedule_name(job.decoder.schedule)},
                    {"llr_cap", job.decoder.llr_cap},
                    {"fixed_subset", job.decoder.fixed_subset}};
    j["channel_grid"] = std::move(grid);
    j["min_words"] = job.min_words;
    j["min_word_errors"] = job.min_word_errors;
    j["max_words"] = job.max_words;
    j["all_zero"] = job.all_zero;
    j["master_seed"] = job.master_seed;
    // workers deliberately omitted: outputs must not depend on parallelism
    return j;
}

// CSV of the per-point results plus a JSON sidecar holding the job config.
// Identical job + results produce identical bytes.
inline void persist(const SimJob& job, const std::vector<TrialBatchResult>& results,
                    const std::string& path) {
    std::ofstream csv(path, std::ios::binary);
    if (!csv) throw std::runtime_error("persist: cannot open " + path);
    csv << kCsvHeader << '\n';
    for (const auto& rec : to_csv_records(job, results)) csv << csv_line(rec) << '\n';
    csv.flush();
    if (!csv) throw std::runtime_error("persist: write failed for " + path);

    const std::string json_path = sidecar_path(path);
    std::ofstream sidecar(json_path, std::ios::binary);
    if (!sidecar) throw std::runtime_error("persist: cannot open " + json_path);
    sidecar << job_to_json(job).dump(2) << '\n';
    sidecar.flush();
    if (!sidecar) throw std::runtime_error("persist: write failed for " + json_path);
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (true) {
        std::string field;
        if (pos < line.size() && line[pos] == '"') {
            const std::size_t close = line.find('"', pos + 1);
            if (close == std::string::npos) throw std::runtime_error("csv: unterminated quote");
            field = line.substr(pos + 1, close - pos - 1);
            pos = close + 1;
        } else {
            std::size_t comma = line.find(',', pos);
            if (comma == std::string::npos) comma = line.size();
            field = line.substr(pos, comma - pos);
            pos = comma;
        }
        fields.push_back(std::move(field));
        if (pos >= line.size()) break;
        if (line[pos] != ',') throw std::runtime_error("csv: expected comma");
        ++pos;
        if (pos == line.size()) {  // trailing comma, final empty field
            fields.emplace_back();
            break;
        }
    }
    return fields;
}

inline double parse_double(const std::string& text) {
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
        throw std::runtime_error("csv: bad real '" + text + "'");
    return value;
}

}  // namespace detail

inline std::vector<CsvRecord> load_results_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_results_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader)
        throw std::runtime_error("load_results_csv: bad header");
    std::vector<CsvRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> f = detail::split_csv_line(line);
        if (f.size() != 14) throw std::runtime_error("load_results_csv: bad field count");
        CsvRecord rec;
        rec.code = f[0];
        rec.decoder = f[1];
        rec.r_p = f[2];
        rec.r_q = detail::parse_double(f[3]);
        rec.ebn0_db = detail::parse_double(f[4]);
        rec.words = std::stoll(f[5]);
        rec.word_errors = std::stoll(f[6]);
        rec.wer = detail::parse_double(f[7]);
        rec.wer_ci_lo = detail::parse_double(f[8]);
        rec.wer_ci_hi = detail::parse_double(f[9]);
        rec.ber = detail::parse_double(f[10]);
        rec.mean_fht = detail::parse_double(f[11]);
        rec.mean_iters = detail::parse_double(f[12]);
        rec.seed = std::stoull(f[13]);
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace rmpa
