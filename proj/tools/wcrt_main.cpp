#include "wcrt/dataset.hpp"
#include "wcrt/error.hpp"
#include "wcrt/flagger.hpp"
#include "wcrt/format.hpp"
#include "wcrt/ncurve.hpp"
#include "wcrt/solver.hpp"
#include "wcrt/stats.hpp"
#include "wcrt/wave.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------------------
// option plumbing: every option can also arrive from a --config JSON file and
// is echoed back into the report's run_config.json
// ---------------------------------------------------------------------------

struct OptionMirror {
    std::vector<std::string> order;
    std::map<std::string, std::function<void(const json&)>> apply;
    std::map<std::string, std::function<ordered_json()>> save;

    void seed_from(const json& config, const std::string& context) {
        for (const auto& [key, value] : config.items()) {
            const auto it = apply.find(key);
            if (it == apply.end())
                throw wcrt::DataError("config key '" + key + "' is not an option of '" + context +
                                      "'");
            try {
                it->second(value);
            } catch (const json::exception& e) {
                throw wcrt::DataError("config key '" + key + "': wrong type: " + e.what());
            }
        }
    }

    ordered_json snapshot() const {
        ordered_json out;
        for (const auto& name : order) out[name] = save.at(name)();
        return out;
    }
};

template <class T>
CLI::Option* bind_opt(CLI::App* cmd, OptionMirror& mirror, const std::string& name, T& var,
                  const std::string& desc) {
    auto* opt = cmd->add_option("--" + name, var, desc);
    mirror.order.push_back(name);
    mirror.apply[name] = [&var](const json& j) { var = j.get<T>(); };
    mirror.save[name] = [&var]() { return ordered_json(var); };
    return opt;
}

CLI::Option* bind_flag(CLI::App* cmd, OptionMirror& mirror, const std::string& name, bool& var,
                       const std::string& desc) {
    auto* opt = cmd->add_flag("--" + name, var, desc);
    mirror.order.push_back(name);
    mirror.apply[name] = [&var](const json& j) { var = j.get<bool>(); };
    mirror.save[name] = [&var]() { return ordered_json(var); };
    return opt;
}

/// Resolves an output path against WCRT_OUTPUT_DIR when it is relative.
fs::path resolve_output(const std::string& path) {
    fs::path p(path);
    if (p.is_absolute()) return p;
    if (const char* base = std::getenv("WCRT_OUTPUT_DIR"); base && *base)
        return fs::path(base) / p;
    return p;
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw wcrt::DataError("cannot open '" + path.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw wcrt::DataError("failed writing '" + path.string() + "'");
}

std::string fnv1a64_hex(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------------------
// shared option bundles
// ---------------------------------------------------------------------------

struct TestOptions {
    std::string tail = "two";
    double alpha = 0.05;
};

struct SolverOptions {
    double delta = 1e-6;
    int max_iterations = 10000;
    std::int64_t cap = 1000000000;
    double theta = 0.0;
};

void bind_test_options(CLI::App* cmd, OptionMirror& m, TestOptions& t) {
    bind_opt(cmd, m, "tail", t.tail, "test tail: upper, lower or two")
        ->check(CLI::IsMember({"upper", "lower", "two"}));
    bind_opt(cmd, m, "alpha", t.alpha, "significance level")
        ->check(CLI::Range(1e-12, 0.5));
}

void bind_solver_options(CLI::App* cmd, OptionMirror& m, SolverOptions& s) {
    bind_opt(cmd, m, "delta", s.delta, "fixed-point convergence tolerance");
    bind_opt(cmd, m, "max-iterations", s.max_iterations, "iteration budget per solve");
    bind_opt(cmd, m, "cap", s.cap, "largest hypothetical group size considered");
    bind_opt(cmd, m, "theta", s.theta, "allowed relative deviation of s2 from s1")
        ->check(CLI::Range(0.0, 1.0));
}

wcrt::Tail parse_tail(const std::string& tail) {
    if (tail == "upper") return wcrt::Tail::upper;
    if (tail == "lower") return wcrt::Tail::lower;
    return wcrt::Tail::two;
}

wcrt::TestSpec make_spec(wcrt::TestFamily family, const TestOptions& t, double mu0 = 0.0) {
    wcrt::TestSpec spec;
    spec.family = family;
    spec.tail = parse_tail(t.tail);
    spec.alpha = t.alpha;
    spec.mu0 = mu0;
    return spec;
}

wcrt::SolverConfig make_config(const SolverOptions& s) {
    wcrt::SolverConfig c;
    c.delta = s.delta;
    c.max_iterations = s.max_iterations;
    c.n2_cap = s.cap;
    c.theta = s.theta;
    return c;
}

const char* status_name(wcrt::WcrtStatus s) {
    switch (s) {
    case wcrt::WcrtStatus::finite: return "finite";
    case wcrt::WcrtStatus::infinite: return "infinite";
    case wcrt::WcrtStatus::non_converged: return "non_converged";
    }
    return "unknown";
}

void print_result(const wcrt::WcrtResult& r, bool as_json) {
    if (as_json) {
        ordered_json j;
        j["status"] = status_name(r.status);
        j["scenario"] = static_cast<int>(r.scenario);
        if (r.status == wcrt::WcrtStatus::finite) {
            j["n2"] = r.n2;
            j["stat_at_n2"] = r.stat_at_n2;
            if (std::isfinite(r.stat_at_n2_minus_1)) j["stat_at_n2_minus_1"] = r.stat_at_n2_minus_1;
            else j["stat_at_n2_minus_1"] = nullptr;
            j["critical_value"] = r.critical_value;
        } else {
            j["n2"] = nullptr;
        }
        j["at_cap"] = r.at_cap;
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::cout << "scenario: " << static_cast<int>(r.scenario) << '\n';
    std::cout << "status: " << status_name(r.status) << '\n';
    if (r.status == wcrt::WcrtStatus::finite) {
        std::cout << "n2: " << r.n2 << '\n';
        std::cout << "stat_at_n2: " << wcrt::format_double(r.stat_at_n2) << '\n';
        std::cout << "stat_at_n2_minus_1: " << wcrt::format_double(r.stat_at_n2_minus_1) << '\n';
        std::cout << "critical_value: " << wcrt::format_double(r.critical_value) << '\n';
    } else if (r.at_cap) {
        std::cout << "note: a reversal exists beyond the cap; raise --cap to locate it\n";
    }
}

// ---------------------------------------------------------------------------
// survey pipeline shared by wave / flags / report / alpha
// ---------------------------------------------------------------------------

struct SurveyInputs {
    std::string input;
    std::string scales;
    std::string timestamp;
};

void bind_survey_inputs(CLI::App* cmd, OptionMirror& m, SurveyInputs& in) {
    bind_opt(cmd, m, "input", in.input, "survey responses CSV")->required();
    bind_opt(cmd, m, "scales", in.scales, "scale definition JSON")->required();
    bind_opt(cmd, m, "timestamp", in.timestamp,
         "name of an ISO-8601 column that orders respondents");
}

struct SurveyPipeline {
    wcrt::ScaleConfig config;
    wcrt::RawSurvey survey;
    wcrt::ScaleScores scores;
    wcrt::CorrelationMatrix matrix;
};

SurveyPipeline run_pipeline(const SurveyInputs& in) {
    SurveyPipeline p;
    p.config = wcrt::load_scale_config(in.scales);
    wcrt::SurveyOptions opt;
    opt.scale_points = p.config.scale_points;
    opt.timestamp_column = in.timestamp;
    p.survey = wcrt::load_survey_csv(in.input, opt);
    p.scores = wcrt::build_scales(p.survey, p.config);
    p.matrix = wcrt::correlation_matrix(p.scores);
    return p;
}

std::string render_alpha_table(const wcrt::ScaleScores& scores,
                               const wcrt::ScaleConfig& config, bool csv) {
    std::string out = csv ? "scale,items,cronbach_alpha\n" : "";
    char line[128];
    if (!csv) {
        std::snprintf(line, sizeof line, "%-12s %6s %15s\n", "scale", "items", "cronbach_alpha");
        out += line;
    }
    for (std::size_t i = 0; i < scores.names.size(); ++i) {
        const std::size_t items = config.scales[i].items.size();
        const std::string a = std::isnan(scores.alphas[i]) ? std::string("")
                                                           : wcrt::format_double(scores.alphas[i]);
        if (csv) {
            out += scores.names[i] + ',' + std::to_string(items) + ',' + a + '\n';
        } else {
            std::snprintf(line, sizeof line, "%-12s %6zu %15.3f\n", scores.names[i].c_str(), items,
                          scores.alphas[i]);
            out += line;
        }
    }
    return out;
}

std::string render_correlation_csv(const wcrt::CorrelationMatrix& m) {
    std::string out = "scale_a,scale_b,r,z,p,stars\n";
    for (std::size_t i = 0; i < m.names.size(); ++i) {
        for (std::size_t j = i + 1; j < m.names.size(); ++j) {
            const auto& c = m.cells[i][j];
            out += m.names[i] + ',' + m.names[j] + ',' + wcrt::format_double(c.r) + ',' +
                   wcrt::format_double(c.z) + ',' + wcrt::format_double(c.p) + ',' +
                   std::string(static_cast<std::size_t>(c.stars), '*') + '\n';
        }
    }
    return out;
}

struct PairWave {
    std::string pair;
    double r = 0.0;
    wcrt::WaveCorrelation wave;
};

std::vector<PairWave> pair_waves(const SurveyPipeline& p, double fraction,
                                 const std::vector<double>& n3) {
    std::vector<PairWave> out;
    for (std::size_t i = 0; i < p.scores.names.size(); ++i) {
        for (std::size_t j = i + 1; j < p.scores.names.size(); ++j) {
            PairWave w;
            w.pair = p.scores.names[i] + "-" + p.scores.names[j];
            w.r = p.matrix.cells[i][j].r;
            w.wave = wcrt::wave_correlations(p.scores.columns[i], p.scores.columns[j], fraction,
                                             n3);
            out.push_back(std::move(w));
        }
    }
    return out;
}

std::string render_wave_csv(const std::vector<PairWave>& waves) {
    std::string out = "pair,r,r_wave1,r_wave2,n3,m1,m2,m3,truncated\n";
    for (const auto& w : waves) {
        for (std::size_t k = 0; k < w.wave.n3.size(); ++k) {
            const auto& e = w.wave.estimates[k];
            std::string trunc;
            if (e.m1_truncated) trunc += "m1";
            if (e.m2_truncated) trunc += (trunc.empty() ? "" : ";") + std::string("m2");
            if (e.m3_truncated) trunc += (trunc.empty() ? "" : ";") + std::string("m3");
            out += w.pair + ',' + wcrt::format_double(w.r) + ',' +
                   wcrt::format_double(w.wave.r_wave1) + ',' +
                   wcrt::format_double(w.wave.r_wave2) + ',' + wcrt::format_double(w.wave.n3[k]) +
                   ',' + wcrt::format_double(e.m1) + ',' + wcrt::format_double(e.m2) + ',' +
                   wcrt::format_double(e.m3) + ',' + trunc + '\n';
        }
    }
    return out;
}

wcrt::FlagReport flags_for_group(const SurveyPipeline& p, const std::vector<PairWave>& waves,
                                 double fraction, double n2, const std::vector<double>& alphas) {
    std::vector<wcrt::PairInput> inputs;
    const double total = static_cast<double>(p.scores.columns.front().size());
    const double f1 = total * fraction;
    const double f2 = total - f1;
    for (const auto& w : waves) {
        wcrt::PairInput in;
        in.pair = w.pair;
        in.r = w.r;
        in.estimates = wcrt::wave_estimates_corr(w.wave.r_wave1, w.wave.r_wave2, f1, f2, n2);
        inputs.push_back(std::move(in));
    }
    return wcrt::build_flag_report(inputs, p.matrix.n, static_cast<std::int64_t>(n2), alphas);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"worst-case resistance of statistical conclusions to nonresponse"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    // Every subcommand accepts --config; values there seed the options and
    // explicit flags override them.
    std::string config_path;

    // ttest ------------------------------------------------------------
    auto* c_ttest = app.add_subcommand("ttest", "reversal size for a one-sample t test");
    OptionMirror m_ttest;
    struct {
        std::int64_t n1 = 0;
        double mean = 0.0, sd = 0.0, mu0 = 0.0, d2 = 0.0;
        double s2 = -1.0; // negative = same as sd
        TestOptions test;
        SolverOptions solver;
        bool as_json = false;
    } t;
    bind_opt(c_ttest, m_ttest, "n1", t.n1, "respondents")->required()->check(CLI::PositiveNumber);
    bind_opt(c_ttest, m_ttest, "mean", t.mean, "respondent mean")->required();
    bind_opt(c_ttest, m_ttest, "sd", t.sd, "respondent standard deviation")
        ->required()
        ->check(CLI::PositiveNumber);
    bind_opt(c_ttest, m_ttest, "mu0", t.mu0, "hypothesized mean");
    bind_opt(c_ttest, m_ttest, "d2", t.d2, "standardized effect assumed for the extra group")
        ->required();
    bind_opt(c_ttest, m_ttest, "s2", t.s2, "standard deviation of the extra group (default: sd)");
    bind_test_options(c_ttest, m_ttest, t.test);
    bind_solver_options(c_ttest, m_ttest, t.solver);
    bind_flag(c_ttest, m_ttest, "json", t.as_json, "print the result as JSON");
    c_ttest->add_option("--config", config_path, "JSON file with option defaults");

    // corr -------------------------------------------------------------
    auto* c_corr = app.add_subcommand("corr", "reversal size for a correlation test");
    OptionMirror m_corr;
    struct {
        double r1 = 0.0, r2 = 0.0;
        std::int64_t n1 = 0;
        TestOptions test;
        SolverOptions solver;
        bool as_json = false;
    } co;
    bind_opt(c_corr, m_corr, "r1", co.r1, "observed correlation")->required()
        ->check(CLI::Range(-1.0, 1.0));
    bind_opt(c_corr, m_corr, "n1", co.n1, "respondents")->required()->check(CLI::PositiveNumber);
    bind_opt(c_corr, m_corr, "r2", co.r2, "correlation assumed for the extra group")
        ->required()
        ->check(CLI::Range(-1.0, 1.0));
    bind_test_options(c_corr, m_corr, co.test);
    bind_solver_options(c_corr, m_corr, co.solver);
    bind_flag(c_corr, m_corr, "json", co.as_json, "print the result as JSON");
    c_corr->add_option("--config", config_path, "JSON file with option defaults");

    // ncurve -----------------------------------------------------------
    auto* c_ncurve = app.add_subcommand("ncurve", "reversal sizes over a grid of assumed effects");
    OptionMirror m_ncurve;
    struct {
        std::string family = "corr";
        double r1 = 0.0;
        std::int64_t n1 = 0;
        double mean = 0.0, sd = 1.0, mu0 = 0.0;
        double s2 = -1.0;
        double lo = 0.0, hi = 0.0;
        std::size_t points = 17;
        std::vector<double> annotate;
        std::string csv_path, svg_path;
        TestOptions test;
        SolverOptions solver;
    } nc;
    bind_opt(c_ncurve, m_ncurve, "family", nc.family, "test family: corr or ttest")
        ->check(CLI::IsMember({"corr", "ttest"}));
    bind_opt(c_ncurve, m_ncurve, "r1", nc.r1, "observed correlation (corr family)")
        ->check(CLI::Range(-1.0, 1.0));
    bind_opt(c_ncurve, m_ncurve, "n1", nc.n1, "respondents")->required()->check(CLI::PositiveNumber);
    bind_opt(c_ncurve, m_ncurve, "mean", nc.mean, "respondent mean (ttest family)");
    bind_opt(c_ncurve, m_ncurve, "sd", nc.sd, "respondent standard deviation (ttest family)");
    bind_opt(c_ncurve, m_ncurve, "mu0", nc.mu0, "hypothesized mean (ttest family)");
    bind_opt(c_ncurve, m_ncurve, "s2", nc.s2, "extra-group standard deviation (ttest family)");
    bind_opt(c_ncurve, m_ncurve, "lo", nc.lo, "grid lower endpoint");
    bind_opt(c_ncurve, m_ncurve, "hi", nc.hi, "grid upper endpoint");
    bind_opt(c_ncurve, m_ncurve, "points", nc.points, "grid size")->check(CLI::Range(2, 100000));
    bind_opt(c_ncurve, m_ncurve, "annotate", nc.annotate, "effect values to label in the SVG");
    bind_opt(c_ncurve, m_ncurve, "csv", nc.csv_path, "write the curve as CSV here");
    bind_opt(c_ncurve, m_ncurve, "svg", nc.svg_path, "write the curve as SVG here");
    bind_test_options(c_ncurve, m_ncurve, nc.test);
    bind_solver_options(c_ncurve, m_ncurve, nc.solver);
    c_ncurve->add_option("--config", config_path, "JSON file with option defaults");

    // wave --------------------------------------------------------------
    auto* c_wave = app.add_subcommand("wave", "wave-trend estimates for every scale pair");
    OptionMirror m_wave;
    struct {
        SurveyInputs in;
        double fraction = 0.5;
        std::vector<double> n3;
        std::string output;
    } wv;
    bind_survey_inputs(c_wave, m_wave, wv.in);
    bind_opt(c_wave, m_wave, "fraction", wv.fraction, "share of respondents in the early wave")
        ->check(CLI::Range(1e-9, 1.0 - 1e-9));
    bind_opt(c_wave, m_wave, "n3", wv.n3, "hypothetical extra group sizes")->required();
    bind_opt(c_wave, m_wave, "output", wv.output, "write CSV here instead of stdout");
    c_wave->add_option("--config", config_path, "JSON file with option defaults");

    // flags ---------------------------------------------------------------
    auto* c_flags = app.add_subcommand(
        "flags", "flag correlations a hypothetical extra group could overturn");
    OptionMirror m_flags;
    struct {
        SurveyInputs in;
        double fraction = 0.5;
        double n2 = 0.0;
        std::vector<double> alphas{0.05, 0.01};
        std::string output;
        bool as_text = false;
    } fl;
    bind_survey_inputs(c_flags, m_flags, fl.in);
    bind_opt(c_flags, m_flags, "fraction", fl.fraction, "share of respondents in the early wave")
        ->check(CLI::Range(1e-9, 1.0 - 1e-9));
    bind_opt(c_flags, m_flags, "n2", fl.n2, "hypothetical extra group size")
        ->required()
        ->check(CLI::PositiveNumber);
    bind_opt(c_flags, m_flags, "alphas", fl.alphas, "significance levels to assess");
    bind_opt(c_flags, m_flags, "output", fl.output, "write here instead of stdout");
    bind_flag(c_flags, m_flags, "text", fl.as_text, "render an aligned table instead of CSV");
    c_flags->add_option("--config", config_path, "JSON file with option defaults");

    // report ---------------------------------------------------------------
    auto* c_report = app.add_subcommand("report", "full nonresponse-bias artifact set");
    OptionMirror m_report;
    struct {
        SurveyInputs in;
        double fraction = 0.5;
        std::vector<double> n3{415, 1245, 3735};
        std::vector<double> alphas{0.05, 0.01};
        std::string outdir;
        SolverOptions solver;
    } rp;
    bind_survey_inputs(c_report, m_report, rp.in);
    bind_opt(c_report, m_report, "fraction", rp.fraction, "share of respondents in the early wave")
        ->check(CLI::Range(1e-9, 1.0 - 1e-9));
    bind_opt(c_report, m_report, "n3", rp.n3, "hypothetical extra group sizes");
    bind_opt(c_report, m_report, "alphas", rp.alphas, "significance levels to assess");
    bind_opt(c_report, m_report, "outdir", rp.outdir, "directory for the artifact files")->required();
    bind_solver_options(c_report, m_report, rp.solver);
    c_report->add_option("--config", config_path, "JSON file with option defaults");

    // alpha -----------------------------------------------------------------
    auto* c_alpha = app.add_subcommand("alpha", "internal consistency of each scale");
    OptionMirror m_alpha;
    struct {
        SurveyInputs in;
        bool as_csv = false;
    } al;
    bind_survey_inputs(c_alpha, m_alpha, al.in);
    bind_flag(c_alpha, m_alpha, "csv", al.as_csv, "emit CSV instead of a table");
    c_alpha->add_option("--config", config_path, "JSON file with option defaults");

    // --config pre-pass: seed option variables before CLI11 parses argv, so
    // command-line flags win.
    try {
        for (int i = 1; i < argc; ++i) {
            const std::string a = argv[i];
            std::string path;
            if (a == "--config" && i + 1 < argc) path = argv[i + 1];
            else if (a.rfind("--config=", 0) == 0) path = a.substr(9);
            if (path.empty()) continue;
            std::ifstream in(path, std::ios::binary);
            if (!in) throw wcrt::DataError("cannot open config '" + path + "'");
            json cfg;
            try {
                cfg = json::parse(in);
            } catch (const json::exception& e) {
                throw wcrt::DataError("config '" + path + "' is not valid JSON: " +
                                      std::string(e.what()));
            }
            const std::string sub = argc > 1 ? argv[1] : "";
            OptionMirror* mirror = nullptr;
            if (sub == "ttest") mirror = &m_ttest;
            else if (sub == "corr") mirror = &m_corr;
            else if (sub == "ncurve") mirror = &m_ncurve;
            else if (sub == "wave") mirror = &m_wave;
            else if (sub == "flags") mirror = &m_flags;
            else if (sub == "report") mirror = &m_report;
            else if (sub == "alpha") mirror = &m_alpha;
            if (mirror) mirror->seed_from(cfg, sub);
            config_path = path; // lets the relax pass below see the file too
            break;
        }
    } catch (const wcrt::DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }

    // A config may satisfy options CLI11 considers required; drop the
    // requirement when the value already arrived that way.
    auto relax_required = [&](CLI::App* cmd, OptionMirror& mirror, const json& provided) {
        (void)mirror;
        for (const auto& [key, value] : provided.items()) {
            (void)value;
            if (auto* opt = cmd->get_option_no_throw("--" + key); opt && opt->get_required())
                opt->required(false);
        }
    };
    if (!config_path.empty()) {
        std::ifstream in(config_path, std::ios::binary);
        if (in) {
            json cfg = json::parse(in, nullptr, false);
            if (!cfg.is_discarded()) {
                const std::string sub = argc > 1 ? argv[1] : "";
                if (sub == "ttest") relax_required(c_ttest, m_ttest, cfg);
                else if (sub == "corr") relax_required(c_corr, m_corr, cfg);
                else if (sub == "ncurve") relax_required(c_ncurve, m_ncurve, cfg);
                else if (sub == "wave") relax_required(c_wave, m_wave, cfg);
                else if (sub == "flags") relax_required(c_flags, m_flags, cfg);
                else if (sub == "report") relax_required(c_report, m_report, cfg);
                else if (sub == "alpha") relax_required(c_alpha, m_alpha, cfg);
            }
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(c_ttest)) {
            wcrt::SampleSummary s{t.n1, t.mean, t.sd};
            const auto spec = make_spec(wcrt::TestFamily::mean_single_sample, t.test, t.mu0);
            std::optional<double> s2;
            if (t.s2 >= 0.0) s2 = t.s2;
            const auto res = wcrt::solve_ttest_n2(s, spec, {wcrt::EffectKind::cohen_d, t.d2}, s2,
                                                  make_config(t.solver));
            print_result(res, t.as_json);
        } else if (app.got_subcommand(c_corr)) {
            const auto spec = make_spec(wcrt::TestFamily::correlation, co.test);
            const auto res = wcrt::solve_corr_n2(co.r1, co.n1, co.r2, spec,
                                                 make_config(co.solver));
            print_result(res, co.as_json);
        } else if (app.got_subcommand(c_ncurve)) {
            wcrt::NCurve curve;
            std::vector<double> annotate = nc.annotate;
            if (nc.family == "corr") {
                if (nc.lo == 0.0 && nc.hi == 0.0) { nc.lo = -0.9; nc.hi = -0.1; }
                if (annotate.empty()) annotate = {-0.9, -0.7, -0.5, -0.3, -0.1};
                const auto grid = wcrt::effect_grid(nc.lo, nc.hi, nc.points);
                curve = wcrt::sweep_corr(nc.r1, nc.n1,
                                         make_spec(wcrt::TestFamily::correlation, nc.test), grid,
                                         make_config(nc.solver));
            } else {
                if (nc.lo == 0.0 && nc.hi == 0.0) { nc.lo = -0.8; nc.hi = 0.8; }
                if (annotate.empty()) annotate = {-0.8, -0.5, -0.2, 0.2, 0.5, 0.8};
                const auto grid = wcrt::effect_grid(nc.lo, nc.hi, nc.points);
                std::optional<double> s2;
                if (nc.s2 >= 0.0) s2 = nc.s2;
                wcrt::SampleSummary s{nc.n1, nc.mean, nc.sd};
                curve = wcrt::sweep_ttest(s,
                                          make_spec(wcrt::TestFamily::mean_single_sample, nc.test,
                                                    nc.mu0),
                                          grid, s2, make_config(nc.solver));
            }
            const std::string csv = wcrt::render_ncurve_csv(curve);
            if (!nc.csv_path.empty()) write_file(resolve_output(nc.csv_path), csv);
            if (!nc.svg_path.empty())
                write_file(resolve_output(nc.svg_path), wcrt::render_ncurve_svg(curve, annotate));
            if (nc.csv_path.empty() && nc.svg_path.empty()) std::cout << csv;
        } else if (app.got_subcommand(c_wave)) {
            const auto p = run_pipeline(wv.in);
            const auto waves = pair_waves(p, wv.fraction, wv.n3);
            const std::string csv = render_wave_csv(waves);
            if (wv.output.empty()) std::cout << csv;
            else write_file(resolve_output(wv.output), csv);
        } else if (app.got_subcommand(c_flags)) {
            const auto p = run_pipeline(fl.in);
            const auto waves = pair_waves(p, fl.fraction, {});
            const auto report = flags_for_group(p, waves, fl.fraction, fl.n2, fl.alphas);
            const std::string body =
                fl.as_text ? wcrt::render_flag_text(report) : wcrt::render_flag_csv(report);
            if (fl.output.empty()) std::cout << body;
            else write_file(resolve_output(fl.output), body);
        } else if (app.got_subcommand(c_report)) {
            const auto p = run_pipeline(rp.in);
            const fs::path dir = resolve_output(rp.outdir);
            fs::create_directories(dir);

            std::vector<std::pair<std::string, std::string>> artifacts;
            auto emit = [&](const std::string& name, const std::string& content) {
                write_file(dir / name, content);
                artifacts.emplace_back(name, content);
            };

            emit("alpha.csv", render_alpha_table(p.scores, p.config, true));
            emit("correlations.csv", render_correlation_csv(p.matrix));
            emit("correlations.txt", wcrt::render_correlation_text(p.matrix));

            const auto waves = pair_waves(p, rp.fraction, rp.n3);
            emit("wave.csv", render_wave_csv(waves));

            std::string summary = "respondents: " + std::to_string(p.matrix.n) + "\n" +
                                  "rows dropped as incomplete: " +
                                  std::to_string(p.survey.dropped_incomplete) + "\n";
            for (const double n3 : rp.n3) {
                const auto report = flags_for_group(p, waves, rp.fraction, n3, rp.alphas);
                const std::string tag = "n" + wcrt::format_double(n3);
                emit("flags_" + tag + ".csv", wcrt::render_flag_csv(report));
                emit("flags_" + tag + ".txt", wcrt::render_flag_text(report));
                for (const auto& c : wcrt::summarize_flags(report)) {
                    summary += "flags at n2=" + wcrt::format_double(n3) +
                               ", alpha=" + wcrt::format_double(c.alpha) + ": " +
                               std::to_string(c.flagged_pairs);
                    if (!c.pairs.empty()) {
                        summary += " (";
                        for (std::size_t i = 0; i < c.pairs.size(); ++i)
                            summary += (i ? ", " : "") + c.pairs[i];
                        summary += ")";
                    }
                    summary += '\n';
                }
            }

            // Reversal curves for the strongest and weakest correlations that
            // clear the first alpha level.
            {
                const double a0 = rp.alphas.front();
                wcrt::TestSpec spec;
                spec.family = wcrt::TestFamily::correlation;
                spec.tail = wcrt::Tail::two;
                spec.alpha = a0;
                const double C = wcrt::critical_value(spec, 0.0);
                const PairWave* strongest = nullptr;
                const PairWave* weakest = nullptr;
                for (const auto& w : waves) {
                    if (std::abs(wcrt::corr_z_statistic(w.r, p.matrix.n)) <= C) continue;
                    if (!strongest || std::abs(w.r) > std::abs(strongest->r)) strongest = &w;
                    if (!weakest || std::abs(w.r) < std::abs(weakest->r)) weakest = &w;
                }
                const std::vector<double> grid = wcrt::effect_grid(-0.9, -0.1, 17);
                const std::vector<double> annotate{-0.9, -0.7, -0.5, -0.3, -0.1};
                auto emit_curve = [&](const PairWave* w, const std::string& stem) {
                    if (!w) return;
                    auto curve = wcrt::sweep_corr(w->r, p.matrix.n, spec, grid,
                                                  make_config(rp.solver));
                    curve.label = w->pair + " (" + curve.label + ")";
                    emit(stem + ".csv", wcrt::render_ncurve_csv(curve));
                    emit(stem + ".svg", wcrt::render_ncurve_svg(curve, annotate));
                    summary += stem + ": " + w->pair + " r=" + wcrt::format_double(w->r) + '\n';
                };
                emit_curve(strongest, "ncurve_strongest");
                emit_curve(weakest, "ncurve_weakest");
            }

            emit("summary.txt", summary);
            emit("run_config.json", m_report.snapshot().dump(2) + "\n");

            std::sort(artifacts.begin(), artifacts.end());
            ordered_json manifest;
            manifest["artifacts"] = ordered_json::array();
            for (const auto& [name, content] : artifacts) {
                ordered_json a;
                a["path"] = name;
                a["bytes"] = content.size();
                a["fnv1a64"] = fnv1a64_hex(content);
                manifest["artifacts"].push_back(a);
            }
            write_file(dir / "manifest.json", manifest.dump(2) + "\n");
            std::cout << "wrote " << artifacts.size() + 1 << " artifacts to " << dir.string()
                      << '\n';
        } else if (app.got_subcommand(c_alpha)) {
            const auto cfg = wcrt::load_scale_config(al.in.scales);
            wcrt::SurveyOptions opt;
            opt.scale_points = cfg.scale_points;
            opt.timestamp_column = al.in.timestamp;
            const auto survey = wcrt::load_survey_csv(al.in.input, opt);
            const auto scores = wcrt::build_scales(survey, cfg);
            std::cout << render_alpha_table(scores, cfg, al.as_csv);
        }
    } catch (const wcrt::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const wcrt::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 4;
    } catch (const std::domain_error& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
