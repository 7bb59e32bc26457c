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

// evcsf: post-incident forensic analysis of EV charging-station logs.
//
// Exit status: 0 success, 1 usage error, 2 data error.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "evcsf/evcsf.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

const std::map<std::string, std::string> kSynopsis{
    {"generate", "evcsf generate --scenario <name|file> --out <dir> [--seed N] [--jitter-ms N]"},
    {"analyze",
     "evcsf analyze --input <file|dir>... --model <file> [--out <file>] [--gap-threshold <seconds>] "
     "[--from <ts>] [--to <ts>] [--source <label>]... [--kind <kind>]... [--renormalize]"},
    {"report",
     "evcsf report --analysis <file> --attribution <file> [--vocab <file>] [--timeline <id>] "
     "[--format text|json] [--draft] [--out <file>]"},
    {"evaluate", "evcsf evaluate --manifest <file> --analysis <file> [--out <file>]"},
    {"validate-model", "evcsf validate-model --model <file> [--renormalize]"},
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void write_output(const std::optional<std::string>& out, const std::string& text) {
    if (!out) {
        std::cout << text;
        return;
    }
    const fs::path path(*out);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw evcsf::Error(evcsf::ErrorCode::FileUnreadable, "cannot write " + path.string());
    f << text;
}

bool same_path(const fs::path& a, const fs::path& b) {
    std::error_code ec;
    return fs::weakly_canonical(a, ec) == fs::weakly_canonical(b, ec);
}

void require_distinct(const std::vector<std::string>& inputs, const std::optional<std::string>& out) {
    if (!out) return;
    for (const auto& in : inputs) {
        if (same_path(in, *out)) throw UsageError("output path " + *out + " is also an input");
    }
}

/// Files are taken as given; directories contribute their *.log files in
/// name order.
std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs) {
    std::vector<fs::path> out;
    for (const auto& in : inputs) {
        if (fs::is_directory(in)) {
            std::vector<fs::path> logs;
            for (const auto& entry : fs::directory_iterator(in)) {
                if (entry.is_regular_file() && entry.path().extension() == ".log") logs.push_back(entry.path());
            }
            std::sort(logs.begin(), logs.end());
            out.insert(out.end(), logs.begin(), logs.end());
        } else {
            out.emplace_back(in);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
    std::string scenario;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> jitter_ms;
};

int run_generate(const GenerateArgs& args) {
    auto scenario = evcsf::builtin_scenario(args.scenario);
    if (!scenario) scenario = evcsf::scenario_from_json(evcsf::read_json_file(args.scenario));
    if (args.seed) scenario->seed = *args.seed;
    if (args.jitter_ms) scenario->jitter_ms = *args.jitter_ms;

    const auto episode = evcsf::generate(*scenario);
    fs::create_directories(args.out);
    const auto log_path = fs::path(args.out) / (scenario->name + ".log");
    const auto manifest_path = fs::path(args.out) / (scenario->name + ".manifest.json");
    write_output(log_path.string(), evcsf::to_log_text(episode.records, "scenario " + scenario->name + " seed " +
                                                                           std::to_string(scenario->seed)));
    write_output(manifest_path.string(), evcsf::dump(evcsf::to_json(episode.manifest)));
    std::cerr << "generated " << episode.records.size() << " records, " << episode.manifest.falsified.size()
              << " falsified -> " << log_path.string() << "\n";
    return kExitOk;
}

struct AnalyzeArgs {
    std::vector<std::string> inputs;
    std::string model;
    std::optional<std::string> out;
    double gap_seconds{300.0};
    std::optional<std::string> from;
    std::optional<std::string> to;
    std::vector<std::string> sources;
    std::vector<std::string> kinds;
    bool renormalize{false};
};

int run_analyze(const AnalyzeArgs& args) {
    auto inputs = args.inputs;
    inputs.push_back(args.model);
    require_distinct(inputs, args.out);
    if (!(args.gap_seconds > 0.0)) throw UsageError("--gap-threshold must be positive");

    evcsf::AnalysisOptions options;
    options.gap_threshold_ms = static_cast<std::int64_t>(std::llround(args.gap_seconds * 1000.0));
    if (options.gap_threshold_ms <= 0) throw UsageError("--gap-threshold must be at least 1 ms");
    try {
        if (args.from) options.filters.from = evcsf::parse_display(*args.from);
        if (args.to) options.filters.to = evcsf::parse_display(*args.to);
    } catch (const evcsf::Error& e) {
        throw UsageError(e.what());
    }
    options.filters.sources.insert(args.sources.begin(), args.sources.end());
    for (const auto& k : args.kinds) {
        const auto kind = evcsf::parse_record_kind(k);
        if (!kind) throw UsageError("unknown --kind '" + k + "'");
        options.filters.kinds.insert(*kind);
    }

    const auto model = evcsf::load_model(args.model, args.renormalize);
    const auto files = expand_inputs(args.inputs);
    const auto ingested = evcsf::ingest(files);
    for (const auto& w : ingested.report.warnings) std::cerr << "warning: " << w << "\n";
    for (const auto& m : ingested.report.malformed) {
        std::cerr << "malformed: " << m.file << ":" << m.line << ": " << m.reason << "\n";
    }
    const auto result = evcsf::analyze(ingested, model, options);
    write_output(args.out, evcsf::dump(evcsf::to_json(result)));
    std::size_t flagged = 0;
    for (const auto& a : result.assessments) flagged += a.flagged.size();
    std::cerr << result.ingested << " records, " << result.timelines.size() << " timeline(s), " << flagged
              << " flagged\n";
    return kExitOk;
}

struct ReportArgs {
    std::string analysis;
    std::string attribution;
    std::optional<std::string> vocab;
    std::optional<std::string> timeline;
    std::string format{"text"};
    bool draft{false};
    std::optional<std::string> out;
};

int run_report(const ReportArgs& args) {
    std::vector<std::string> inputs{args.analysis, args.attribution};
    if (args.vocab) inputs.push_back(*args.vocab);
    require_distinct(inputs, args.out);

    evcsf::AttributeVocabulary vocab;
    if (args.vocab) vocab = evcsf::domain_config_from_json(evcsf::read_json_file(*args.vocab)).vocabulary;
    const auto analysis = evcsf::analysis_from_json(evcsf::read_json_file(args.analysis));
    const auto attribution = evcsf::attribution_from_json(evcsf::read_json_file(args.attribution));
    const auto report = evcsf::report_from_analysis(analysis, attribution, vocab, args.timeline,
                                                    args.draft ? evcsf::ReportStatus::Draft
                                                               : evcsf::ReportStatus::Final);
    write_output(args.out, evcsf::render_report(report, args.format == "json" ? evcsf::ReportFormat::Structured
                                                                              : evcsf::ReportFormat::HumanText));
    return kExitOk;
}

struct EvaluateArgs {
    std::string manifest;
    std::string analysis;
    std::optional<std::string> out;
};

int run_evaluate(const EvaluateArgs& args) {
    require_distinct({args.manifest, args.analysis}, args.out);
    const auto manifest = evcsf::manifest_from_json(evcsf::read_json_file(args.manifest));
    const auto analysis = evcsf::analysis_from_json(evcsf::read_json_file(args.analysis));
    const auto summary = evcsf::evaluate_detection(manifest, analysis.assessments);
    write_output(args.out, evcsf::dump(evcsf::to_json(summary)));
    return kExitOk;
}

struct ValidateArgs {
    std::string model;
    bool renormalize{false};
};

int run_validate(const ValidateArgs& args) {
    auto file = evcsf::model_file_from_json(evcsf::read_json_file(args.model));
    if (args.renormalize) file.model = evcsf::renormalized(std::move(file.model));
    const auto report = evcsf::validate_model(file.model);
    std::cout << evcsf::dump(evcsf::to_json(report));
    for (const auto& v : report.violations) {
        std::cerr << "violation: " << v.message;
        if (v.kind == evcsf::Violation::Kind::PriorSum || v.kind == evcsf::Violation::Kind::LikelihoodRowSum) {
            std::cerr << " (residual " << v.residual << ")";
        }
        std::cerr << "\n";
    }
    return report.ok() ? kExitOk : kExitData;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Post-incident forensic analysis of EV charging-station logs", "evcsf"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "Generate synthetic station logs and a ground-truth manifest");
    generate->add_option("--scenario", gen.scenario, "Builtin scenario name (scenario1, scenario1-clean) or file")
        ->required();
    generate->add_option("--out", gen.out, "Output directory")->required();
    generate->add_option("--seed", gen.seed, "Override the scenario seed");
    generate->add_option("--jitter-ms", gen.jitter_ms, "Bounded timing jitter in milliseconds");

    AnalyzeArgs an;
    auto* analyze = app.add_subcommand("analyze", "Ingest, preprocess, correlate, sequence and assess logs");
    analyze->add_option("--input", an.inputs, "Log files or directories of *.log files")->required();
    analyze->add_option("--model", an.model, "Transmission model file")->required();
    analyze->add_option("--out", an.out, "Analysis document (default: stdout)");
    analyze->add_option("--gap-threshold", an.gap_seconds, "Correlation gap threshold in seconds (default 300)");
    analyze->add_option("--from", an.from, "Keep records at or after 'mm-dd-yy [TZ] hh:mm:ss:msec'");
    analyze->add_option("--to", an.to, "Keep records at or before 'mm-dd-yy [TZ] hh:mm:ss:msec'");
    analyze->add_option("--source", an.sources, "Keep only these sources");
    analyze->add_option("--kind", an.kinds, "Keep only these record kinds");
    analyze->add_flag("--renormalize", an.renormalize, "Rescale a non-normalized model instead of rejecting it");

    ReportArgs rep;
    auto* report = app.add_subcommand("report", "Build the 5Ws & 1H incident report");
    report->add_option("--analysis", rep.analysis, "Analysis document from 'analyze'")->required();
    report->add_option("--attribution", rep.attribution, "Investigator attribution file")->required();
    report->add_option("--vocab", rep.vocab, "Vocabulary/layer configuration file");
    report->add_option("--timeline", rep.timeline, "Correlation id of the timeline to report on");
    report->add_option("--format", rep.format, "text or json")->check(CLI::IsMember({"text", "json"}));
    report->add_flag("--draft", rep.draft, "Allow undetermined attributes");
    report->add_option("--out", rep.out, "Report file (default: stdout)");

    EvaluateArgs ev;
    auto* evaluate = app.add_subcommand("evaluate", "Score flagged records against a ground-truth manifest");
    evaluate->add_option("--manifest", ev.manifest, "Manifest from 'generate'")->required();
    evaluate->add_option("--analysis", ev.analysis, "Analysis document from 'analyze'")->required();
    evaluate->add_option("--out", ev.out, "Confusion summary (default: stdout)");

    ValidateArgs va;
    auto* validate = app.add_subcommand("validate-model", "Check model normalization");
    validate->add_option("--model", va.model, "Transmission model file")->required();
    validate->add_flag("--renormalize", va.renormalize, "Validate the renormalized model");

    auto synopsis = [&]() -> std::string {
        for (auto* sub : app.get_subcommands()) {
            if (auto it = kSynopsis.find(sub->get_name()); it != kSynopsis.end()) return it->second;
        }
        std::string all;
        for (const auto& [name, line] : kSynopsis) all += (all.empty() ? "" : "\n       ") + line;
        return all;
    };

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\nusage: " << synopsis() << "\n";
        return kExitUsage;
    }

    try {
        if (*generate) return run_generate(gen);
        if (*analyze) return run_analyze(an);
        if (*report) return run_report(rep);
        if (*evaluate) return run_evaluate(ev);
        if (*validate) return run_validate(va);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\nusage: " << synopsis() << "\n";
        return kExitUsage;
    } catch (const evcsf::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
