// Copyright 2026 The evcs-forensics Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "evcsf/evcsf.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace evcsf;

namespace {

struct Paths {
    std::string cli;
    fs::path source_dir;
    fs::path work_dir;

    fs::path scenarios() const { return source_dir / "scenarios"; }
    fs::path golden() const { return source_dir / "tests" / "golden"; }
};

/// Collects failure details for one criterion; the first few are printed.
class Check {
public:
    void fail(const std::string& what) {
        if (failures_.size() < 5) failures_.push_back(what);
        ++count_;
    }
    void expect(bool ok, const std::string& what) {
        if (!ok) fail(what);
    }
    bool ok() const { return count_ == 0; }
    std::string summary() const {
        std::string out;
        for (const auto& f : failures_) out += "\n    - " + f;
        if (count_ > failures_.size()) out += "\n    - ... " + std::to_string(count_ - failures_.size()) + " more";
        return out;
    }

private:
    std::vector<std::string> failures_;
    std::size_t count_{0};
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

int shell(const std::string& cmd) {
    const int raw = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

// ---------------------------------------------------------------------------

// Golden reproduction through the command line, twice, byte for byte.
Check criterion_1(const Paths& paths) {
    Check c;
    std::string first_text, first_json;
    for (int run = 0; run < 2; ++run) {
        const auto dir = paths.work_dir / ("c1-run" + std::to_string(run));
        fs::remove_all(dir);
        fs::create_directories(dir);
        const auto model = paths.scenarios() / "scenario1.model.json";
        const auto attribution = paths.scenarios() / "scenario1.attribution.json";
        const std::string cli = q(paths.cli);
        c.expect(shell(cli + " generate --scenario " + q(paths.scenarios() / "scenario1.json") + " --out " + q(dir)) == 0,
                 "generate failed");
        c.expect(shell(cli + " analyze --input " + q(dir / "scenario1.log") + " --model " + q(model) + " --out " +
                       q(dir / "analysis.json")) == 0,
                 "analyze failed");
        c.expect(shell(cli + " report --analysis " + q(dir / "analysis.json") + " --attribution " + q(attribution) +
                       " --format text --out " + q(dir / "report.txt")) == 0,
                 "report (text) failed");
        c.expect(shell(cli + " report --analysis " + q(dir / "analysis.json") + " --attribution " + q(attribution) +
                       " --format json --out " + q(dir / "report.json")) == 0,
                 "report (json) failed");
        if (!c.ok()) return c;

        const auto text = slurp(dir / "report.txt");
        const auto json = slurp(dir / "report.json");
        if (run == 0) {
            first_text = text;
            first_json = json;
        } else {
            c.expect(text == first_text && json == first_json, "second run differs from the first");
        }
    }
    c.expect(first_text == slurp(paths.golden() / "scenario1_report.txt"), "text report differs from golden file");
    c.expect(first_json == slurp(paths.golden() / "scenario1_report.json"), "json report differs from golden file");

    // the eight cells, read back from the structured report
    const auto r = parse_report(first_json);
    auto labels = [](const std::vector<LabeledValue>& v) {
        std::vector<std::string> out;
        for (const auto& l : v) out.push_back(l.label);
        return out;
    };
    using V = std::vector<std::string>;
    c.expect(r.attacker && r.attacker->label == "hacker", "alpha != hacker");
    c.expect(labels(r.victim) == V{"EVCS"}, "nu != EVCS");
    c.expect(labels(r.target) == V{"BMS", "CBs"}, "tau != BMS, CBs");
    c.expect(r.when && r.when->date_text() == "05-16-22", "delta != 05-16-22");
    c.expect(r.when && r.when->time_zone == "EST" && r.when->time_text() == "02:20:40:47", "iota != EST 02:20:40:47");
    c.expect(labels(r.attack_path) == V{"OTA update"}, "rho != OTA update");
    c.expect(labels(r.hazardous_behavior) == V{"false reporting", "flawed status"},
             "beta != false reporting, flawed status");
    c.expect(labels(r.attack_method) == V{"tampering"}, "omega != tampering");
    return c;
}

// Normalization check over random renormalized and corrupted models.
Check criterion_2() {
    Check c;
    std::mt19937_64 rng(2002);
    std::uniform_real_distribution<double> delta(0.001, 0.5);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto m = testing::random_model(rng);
        const double residual = testing::worst_normalization_residual(m);
        c.expect(residual <= 1e-9, "trial " + std::to_string(trial) + ": oracle residual " + fmt(residual));
        const auto report = validate_model(m);
        c.expect(report.ok(), "trial " + std::to_string(trial) + ": valid model rejected");

        // corrupt one prior and one likelihood row by a known amount
        auto bad = m;
        const double d = delta(rng) * (rng() % 2 ? 1.0 : -1.0);
        const auto i = rng() % bad.priors.size();
        bad.priors[i] = std::clamp(bad.priors[i] + d, 0.0, 1.0);
        double prior_sum = 0.0;
        for (double p : bad.priors) prior_sum += p;
        const double expected_prior = std::fabs(1.0 - prior_sum);

        const auto row = rng() % bad.likelihood.size();
        const auto col = rng() % bad.likelihood[row].size();
        bad.likelihood[row][col] = std::clamp(bad.likelihood[row][col] + delta(rng), 0.0, 1.0);
        double row_sum = 0.0;
        for (double p : bad.likelihood[row]) row_sum += p;
        const double expected_row = std::fabs(1.0 - row_sum);

        const auto bad_report = validate_model(bad);
        bool saw_prior = expected_prior <= bad.tolerance;
        bool saw_row = expected_row <= bad.tolerance;
        for (const auto& v : bad_report.violations) {
            if (v.kind == Violation::Kind::PriorSum) {
                saw_prior = std::fabs(v.residual - expected_prior) <= 1e-12;
            } else if (v.kind == Violation::Kind::LikelihoodRowSum && v.row == row) {
                saw_row = std::fabs(v.residual - expected_row) <= 1e-12;
            } else {
                c.fail("trial " + std::to_string(trial) + ": unexpected violation " + v.message);
            }
        }
        c.expect(saw_prior, "trial " + std::to_string(trial) + ": prior residual not reported as " + fmt(expected_prior));
        c.expect(saw_row, "trial " + std::to_string(trial) + ": row residual not reported as " + fmt(expected_row));
        c.expect(!bad_report.ok() || (expected_prior <= bad.tolerance && expected_row <= bad.tolerance),
                 "trial " + std::to_string(trial) + ": corrupted model accepted");
    }
    return c;
}

// P(E): summary form vs term-by-term expansion vs joint-table brute force.
Check criterion_3() {
    Check c;
    std::mt19937_64 rng(3003);
    for (int trial = 0; trial < 500; ++trial) {
        const auto m = testing::random_model(rng, 4);
        const double summary = prob_abnormal(m).p_abnormal;
        double terms = 0.0;
        for (std::size_t i = 0; i < m.transmitted.size(); ++i) {
            for (std::size_t j = 0; j < m.received.size(); ++j) {
                if (m.received[j].operation != m.transmitted[i].channel) terms += m.priors[i] * m.likelihood[i][j];
            }
        }
        const double joint = testing::joint_mismatch_probability(m);
        c.expect(std::fabs(summary - terms) <= 1e-12 && std::fabs(summary - joint) <= 1e-12,
                 "trial " + std::to_string(trial) + ": summary " + fmt(summary) + " terms " + fmt(terms) + " joint " +
                     fmt(joint));
    }
    for (std::uint32_t k = 1; k <= 4; ++k) {
        auto id = identity_channel(k);
        c.expect(prob_abnormal(id).p_abnormal == 0.0, "identity channel k=" + std::to_string(k) + " not exactly 0");
        // identity with non-uniform priors
        std::vector<double> w(id.priors.size());
        for (auto& x : w) x = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        id.priors = w;
        id = renormalized(id);
        c.expect(prob_abnormal(id).p_abnormal == 0.0, "weighted identity k=" + std::to_string(k) + " not exactly 0");
    }
    return c;
}

// Bayes identity and posterior normalization.
Check criterion_4() {
    Check c;
    std::mt19937_64 rng(4004);
    for (int trial = 0; trial < 500; ++trial) {
        const auto m = testing::random_model(rng, 4);
        for (std::size_t j = 0; j < m.received.size(); ++j) {
            const double evidence = marginal(m, m.received[j]);
            if (!(evidence > 0.0)) continue;
            const auto post = bayes_posterior(m, m.received[j]);
            const auto oracle = testing::joint_posterior(m, j);
            double total = 0.0;
            for (const auto& p : post) {
                const auto i = *m.index_of(p.symbol);
                const double lhs = m.likelihood[i][j] * m.priors[i];
                const double rhs = p.probability * evidence;
                c.expect(std::fabs(lhs - rhs) <= 1e-12, "trial " + std::to_string(trial) + ": L*P " + fmt(lhs) +
                                                            " vs post*marginal " + fmt(rhs));
                c.expect(std::fabs(p.probability - oracle[i]) <= 1e-12,
                         "trial " + std::to_string(trial) + ": posterior differs from joint-table oracle");
                total += p.probability;
            }
            c.expect(std::fabs(total - 1.0) <= 1e-12,
                     "trial " + std::to_string(trial) + ": posterior sums to " + fmt(total));
        }
    }
    return c;
}

// Every (zeta, chi) pair of width 8.
Check criterion_5() {
    Check c;
    for (unsigned zb = 0; zb < 256; ++zb) {
        for (unsigned cb = 0; cb < 256; ++cb) {
            std::vector<bool> zeta(8), chi(8);
            std::size_t nz = 0, nc = 0;
            for (int i = 0; i < 8; ++i) {
                zeta[i] = (zb >> i) & 1u;
                chi[i] = (cb >> i) & 1u;
                nz += zeta[i];
                nc += chi[i];
            }
            const auto state = testing::make_state(zeta, chi);
            const auto score = incident_score(state);
            c.expect(score == testing::brute_force_score(zeta, chi),
                     "score mismatch at zeta=" + std::to_string(zb) + " chi=" + std::to_string(cb));
            c.expect(is_incident(state) == (nz * nc >= 1),
                     "is_incident mismatch at zeta=" + std::to_string(zb) + " chi=" + std::to_string(cb));
        }
    }
    return c;
}

AnalysisResult analyze_text(const std::string& text, const ModelFile& model) {
    IngestResult ingested;
    ingest_text(text, "episode.log", ingested);
    return analyze(ingested, model);
}

// Scenario-1 detection and the clean control.
Check criterion_6(const Paths& paths) {
    Check c;
    const auto model = load_model(paths.scenarios() / "scenario1.model.json");
    const auto scenario = scenario_from_json(read_json_file(paths.scenarios() / "scenario1.json"));
    const auto episode = generate(scenario);
    const auto analysis = analyze_text(to_log_text(episode.records), model);
    const auto conf = evaluate_detection(episode.manifest, std::span<const AnomalyAssessment>(analysis.assessments));
    c.expect(conf.true_positives == 2 && conf.false_positives == 0 && conf.false_negatives == 0,
             "scenario1: TP=" + std::to_string(conf.true_positives) + " FP=" +
                 std::to_string(conf.false_positives) + " FN=" + std::to_string(conf.false_negatives));

    const auto clean = generate(scenario_from_json(read_json_file(paths.scenarios() / "scenario1-clean.json")));
    const auto clean_analysis = analyze_text(to_log_text(clean.records), model);
    std::size_t flags = 0;
    for (const auto& a : clean_analysis.assessments) flags += a.flagged.size();
    c.expect(flags == 0, "clean control raised " + std::to_string(flags) + " flags");
    const auto spec =
        attribution_from_json(read_json_file(paths.scenarios() / "scenario1-clean.attribution.json"));
    const auto report = report_from_analysis(clean_analysis, spec, {});
    c.expect(!report.is_incident, "clean control reported as incident");
    c.expect(report.incident_state && std::none_of(report.incident_state->chi().begin(),
                                                   report.incident_state->chi().end(), [](bool b) { return b; }),
             "clean control chi is not all zero");
    return c;
}

// Byte-identical timelines and reports under permuted input; idempotence.
Check criterion_7(const Paths& paths) {
    Check c;
    const auto model = load_model(paths.scenarios() / "scenario1.model.json");
    const auto spec = attribution_from_json(read_json_file(paths.scenarios() / "scenario1.attribution.json"));
    auto scenario = scenario_from_json(read_json_file(paths.scenarios() / "scenario1.json"));
    scenario.jitter_ms = 250;  // ties and near-ties between sources
    const auto episode = generate(scenario);

    std::vector<std::string> lines;
    for (const auto& r : episode.records) lines.push_back(format_log_line(r));
    lines.push_back(lines[1]);  // a duplicate across files
    lines.push_back(lines[6]);

    auto render = [&](const AnalysisResult& a) {
        std::string out;
        for (const auto& t : a.timelines) out += dump(to_json(t));
        for (const auto& s : a.assessments) out += dump(to_json(s));
        const auto r = report_from_analysis(a, spec, {});
        return out + render_report(r, ReportFormat::HumanText) + render_report(r, ReportFormat::Structured);
    };

    const auto dir = paths.work_dir / "c7";
    std::mt19937_64 rng(7007);
    std::string baseline;
    for (int trial = 0; trial < 100; ++trial) {
        fs::remove_all(dir);
        fs::create_directories(dir);
        auto shuffled = lines;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        const std::size_t files = 1 + rng() % 4;
        std::vector<std::string> content(files, "# permuted input\n");
        for (const auto& line : shuffled) content[rng() % files] += line + "\n";
        std::vector<fs::path> inputs;
        for (std::size_t f = 0; f < files; ++f) {
            inputs.push_back(dir / ("part" + std::to_string(rng() % 1000) + "-" + std::to_string(f) + ".log"));
            std::ofstream(inputs.back(), std::ios::binary) << content[f];
        }
        std::shuffle(inputs.begin(), inputs.end(), rng);

        const auto ingested = ingest(inputs);
        const auto analysis = analyze(ingested, model);
        const auto rendered = render(analysis);
        if (trial == 0) {
            baseline = rendered;
        } else {
            c.expect(rendered == baseline, "trial " + std::to_string(trial) + ": output differs from trial 0");
        }

        const auto once = preprocess(ingested.records);
        const auto twice = preprocess(once);
        c.expect(once.size() == twice.size() &&
                     std::equal(once.begin(), once.end(), twice.begin(),
                                [](const LogRecord& a, const LogRecord& b) {
                                    return same_content(a, b) && a.duplicate_count == b.duplicate_count;
                                }),
                 "trial " + std::to_string(trial) + ": preprocess is not idempotent");
        for (const auto& t : analysis.timelines) {
            c.expect(sequence(t) == t, "trial " + std::to_string(trial) + ": sequence is not idempotent");
        }
    }
    return c;
}

// Timestamp round trip and rejection of out-of-range fields.
Check criterion_8() {
    Check c;
    std::mt19937_64 rng(8008);
    auto pad = [](unsigned v, int w) {
        std::string s = std::to_string(v);
        while (static_cast<int>(s.size()) < w) s.insert(s.begin(), '0');
        return s;
    };
    for (int i = 0; i < 10000; ++i) {
        const auto ts = testing::random_timestamp(rng);
        const std::string date = pad(ts.month, 2) + "-" + pad(ts.day, 2) + "-" + pad(ts.year % 100, 2);
        const std::string time = pad(ts.hours, 2) + ":" + pad(ts.minutes, 2) + ":" + pad(ts.seconds, 2) + ":" +
                                 pad(ts.milliseconds, static_cast<int>(ts.msec_digits));
        try {
            const auto parsed = parse_timestamp(date, ts.time_zone, time);
            c.expect(parsed == ts, "fields differ after parse of " + date + " " + time);
            c.expect(parsed.date_text() == date && parsed.time_text() == time,
                     "text differs after round trip of " + date + " " + time);
            c.expect(parse_display(to_display(parsed)) == parsed, "display round trip failed for " + date + " " + time);
        } catch (const Error& e) {
            c.fail(date + " " + time + " rejected: " + e.what());
        }
    }

    // every non-empty combination of out-of-range fields, several bad values each
    const std::vector<std::vector<std::string>> bad_values{
        {"00", "13", "99"},  // month
        {"00", "32", "99"},  // day
        {"24", "99"},        // hour
        {"60", "99"},        // minute
        {"60", "99"},        // second
        {"1000", "9999"},    // millisecond (no 4-digit form exists)
    };
    std::size_t cases = 0;
    for (unsigned mask = 1; mask < (1u << 6); ++mask) {
        for (int rep = 0; rep < 8; ++rep) {
            const auto ts = testing::random_timestamp(rng);
            std::vector<std::string> f{pad(ts.month, 2),   pad(ts.day, 2),     pad(ts.hours, 2),
                                       pad(ts.minutes, 2), pad(ts.seconds, 2), pad(ts.milliseconds, 3)};
            for (int b = 0; b < 6; ++b) {
                if (mask & (1u << b)) f[b] = bad_values[b][rng() % bad_values[b].size()];
            }
            const std::string date = f[0] + "-" + f[1] + "-" + pad(ts.year % 100, 2);
            const std::string time = f[2] + ":" + f[3] + ":" + f[4] + ":" + f[5];
            ++cases;
            try {
                parse_timestamp(date, ts.time_zone, time);
                c.fail("accepted " + date + " " + time);
            } catch (const Error& e) {
                c.expect(e.code() == ErrorCode::MalformedTimestamp, "wrong error for " + date + " " + time);
            }
        }
    }
    // day past the end of its month (calendar-invalid, each field in range alone)
    for (unsigned year = 0; year < 100; ++year) {
        for (unsigned month = 1; month <= 12; ++month) {
            const unsigned last = static_cast<unsigned>(
                std::chrono::year_month_day_last{std::chrono::year{static_cast<int>(2000 + year)} /
                                                 std::chrono::month{month} / std::chrono::last}
                    .day());
            for (unsigned day = last + 1; day <= 31; ++day) {
                const std::string date = pad(month, 2) + "-" + pad(day, 2) + "-" + pad(year, 2);
                ++cases;
                try {
                    parse_timestamp(date, "UTC", "00:00:00:000");
                    c.fail("accepted " + date);
                } catch (const Error&) {
                }
            }
        }
    }
    c.expect(cases > 500, "too few rejection cases");
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"evcs-forensics acceptance suite"};
    Paths paths;
    std::string source_dir, work_dir;
    app.add_option("--cli", paths.cli, "Path to the evcsf binary")->required();
    app.add_option("--source-dir", source_dir, "Repository root")->required();
    app.add_option("--work-dir", work_dir, "Scratch directory")->required();
    CLI11_PARSE(app, argc, argv);
    paths.source_dir = source_dir;
    paths.work_dir = work_dir;
    fs::create_directories(paths.work_dir);

    const std::vector<std::pair<std::string, std::function<Check()>>> criteria{
        {"golden 5Ws&1H report for scenario 1 (byte-stable, CLI)", [&] { return criterion_1(paths); }},
        {"normalization residual <= 1e-9 (1000 models) and corrupted residuals", criterion_2},
        {"P(E) summary = expansion = joint brute force within 1e-12 (500 models); identity = 0", criterion_3},
        {"Bayes identity and posterior sums within 1e-12 (500 models)", criterion_4},
        {"incident score = brute force over all 2^8 x 2^8 pairs", criterion_5},
        {"scenario 1 TP=2 FP=0 FN=0; clean control silent", [&] { return criterion_6(paths); }},
        {"permutation-invariant output (100 permutations); idempotent stages", [&] { return criterion_7(paths); }},
        {"timestamp round trip (10000) and out-of-range rejection", criterion_8},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Check result;
        try {
            result = criteria[i].second();
        } catch (const std::exception& e) {
            result.fail(std::string("exception: ") + e.what());
        }
        std::cout << (result.ok() ? "PASS" : "FAIL") << " criterion " << (i + 1) << ": " << criteria[i].first;
        if (!result.ok()) {
            std::cout << result.summary();
            ++failed;
        }
        std::cout << "\n";
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size()
              << " acceptance criteria passed\n";
    return failed == 0 ? 0 : 1;
}
