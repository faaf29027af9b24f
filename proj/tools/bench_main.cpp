// Throughput comparison of the OpenMP batch kernels against their serial
// reference implementations, over a corpus grown from the test fixtures.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "sqlcritic/batch.hpp"

using namespace sqlcritic;
using Clock = std::chrono::steady_clock;

namespace {

std::vector<std::string> load_fixture() {
    std::ifstream in(std::string(FIXTURE_DIR) + "/queries.sql");
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line.rfind("--", 0) == 0) continue;
        out.push_back(line);
    }
    return out;
}

// Repeat the fixture with literal jitter so the corpus is not one cache line.
std::vector<std::string> grow_corpus(const std::vector<std::string>& base, size_t target) {
    std::vector<std::string> out;
    out.reserve(target);
    std::mt19937_64 rng(99);
    while (out.size() < target) {
        for (const auto& q : base) {
            if (out.size() >= target) break;
            std::string variant = q;
            size_t digit = variant.find_last_of("0123456789");
            if (digit != std::string::npos)
                variant[digit] = static_cast<char>('0' + rng() % 10);
            out.push_back(std::move(variant));
        }
    }
    return out;
}

template <typename F>
double time_s(F&& fn) {
    auto start = Clock::now();
    fn();
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void report(const char* kernel, size_t items, double serial_s, double parallel_s) {
    std::printf("%-22s %9zu items   serial %8.3fs   parallel %8.3fs   speedup %5.2fx\n", kernel,
                items, serial_s, parallel_s, serial_s / parallel_s);
}

}  // namespace

int main(int argc, char** argv) {
    size_t n = argc > 1 ? std::stoul(argv[1]) : 20000;
    int threads = argc > 2 ? std::stoi(argv[2]) : omp_get_max_threads();

    std::printf("threads: %d\n", threads);
    auto base = load_fixture();
    if (base.empty()) {
        std::fprintf(stderr, "no fixture queries found\n");
        return 1;
    }
    auto corpus = grow_corpus(base, n);

    {
        std::vector<batch::ParseOutcome> serial_out, parallel_out;
        double s = time_s([&] { serial_out = batch::decompose_many_serial(corpus); });
        double p = time_s([&] { parallel_out = batch::decompose_many(corpus, threads); });
        report("decompose", corpus.size(), s, p);
    }
    {
        std::vector<batch::SqlPair> pairs;
        pairs.reserve(corpus.size() / 2);
        for (size_t i = 0; i + 1 < corpus.size(); i += 2)
            pairs.push_back({corpus[i], corpus[i + 1]});
        std::vector<batch::PairFilterOutcome> serial_out, parallel_out;
        double s = time_s([&] { serial_out = batch::filter_many_serial(pairs, 0.35); });
        double p = time_s([&] { parallel_out = batch::filter_many(pairs, 0.35, threads); });
        report("skeleton-filter", pairs.size(), s, p);
    }
    {
        static const char* phrases[] = {
            "The filter drops the year condition.",
            "The column list is wrong.",
            "Aggregation should use count(*) not sum(id).",
            "Sorting must be descending by capacity.",
            "The join links the wrong tables.",
        };
        std::mt19937_64 rng(7);
        std::vector<batch::CritiquePair> pairs;
        pairs.reserve(n);
        for (size_t i = 0; i < n; ++i) {
            auto mk = [&] {
                if (rng() % 4 == 0) return Critique::correct();
                return Critique::incorrect(
                    {{static_cast<ClauseKind>(rng() % 8), phrases[rng() % 5]},
                     {static_cast<ClauseKind>(rng() % 8), phrases[rng() % 5]}});
            };
            pairs.push_back({mk(), mk()});
        }
        DeterministicJudge judge;
        std::vector<MatchReport> serial_out, parallel_out;
        double s = time_s([&] { serial_out = batch::match_many_serial(pairs, judge); });
        double p = time_s([&] { parallel_out = batch::match_many(pairs, judge, threads); });
        report("critique-match", pairs.size(), s, p);
    }
    {
        std::mt19937_64 rng(13);
        std::uniform_real_distribution<double> ll(-30.0, 0.0);
        const double cs_values[] = {-1.0, 0.0, 0.37, 1.0};
        std::vector<batch::LossSample> samples;
        size_t rows = n * 50;
        samples.reserve(rows);
        for (size_t i = 0; i < rows; ++i)
            samples.push_back({{ll(rng), ll(rng), ll(rng), ll(rng)}, cs_values[i % 4]});
        std::vector<LossResult> serial_out, parallel_out;
        double s = time_s([&] { serial_out = batch::critic_dpo_many_serial(samples, 0.2); });
        double p = time_s([&] { parallel_out = batch::critic_dpo_many(samples, 0.2, threads); });
        report("critic-dpo-loss", samples.size(), s, p);
    }
    return 0;
}
