#include "spcalda/cli.hpp"

#include "spcalda/errors.hpp"
#include "spcalda/io.hpp"
#include "spcalda/model_selection.hpp"
#include "spcalda/scenarios.hpp"
#include "spcalda/serialization.hpp"
#include "spcalda/theory_checks.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace spcalda {

namespace {

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream is(text);
    while (std::getline(is, cur, sep)) {
        const auto a = cur.find_first_not_of(" \t");
        const auto b = cur.find_last_not_of(" \t");
        parts.push_back(a == std::string::npos ? std::string() : cur.substr(a, b - a + 1));
    }
    return parts;
}

double parse_gamma(const std::string& token) {
    const std::string t = lower(token);
    if (t == "inf" || t == "infinity") return kGammaInfinity;
    double v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || !(v > 0) || !std::isfinite(v)) {
        throw ConfigError("gamma value '" + token + "' is not a positive number or 'inf'");
    }
    return v;
}

long parse_long(const std::string& token) {
    long v = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size() || token.empty()) {
        throw ConfigError("'" + token + "' is not an integer");
    }
    return v;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    return out;
}

std::string gamma_text(double g) {
    if (is_gamma_infinity(g)) return "inf";
    std::ostringstream os;
    os << g;
    return os.str();
}

// Flag values shared by the subcommands; each one reads what it needs.
struct Options {
    std::string method = "spcalda";
    std::string gamma;
    long q = 0;
    std::string input;
    std::string label = "class";
    std::string out;
    std::string priors = "empirical";
    std::string model;
    int folds = 5;
    std::uint64_t seed = 0;
    std::string gammas;
    std::string qs;
    int workers = 1;
    int scenario = 1;
    long p = 0;
    long train_per_class = 25;
    long test_per_class = 25;
    std::string scenarios = "1-6";
    int replicates = 10;
    std::string methods = "spcalda,pcalda,srrlda,ir,oracle";
    long q_cap = 40;
    std::string srrlda_metric = "euclidean";
    std::string out_csv;
    std::string out_text;
};

void require_workers(int workers) {
    if (workers < 1) throw ConfigError("--workers must be at least 1");
}

int run_fit(const Options& o, std::ostream& out) {
    const Method method = method_from_string(o.method);
    const PriorsMode priors = priors_from_string(o.priors);
    if (method == Method::ORACLE) throw ConfigError("--method oracle needs the true model and cannot be fit");
    if (!o.gamma.empty() && method != Method::SPCALDA) {
        throw ConfigError("--gamma applies only to --method spcalda");
    }
    const bool needs_q = method == Method::SPCALDA || method == Method::PCALDA;
    if (needs_q && o.q < 1) throw ConfigError("--q must be a positive integer for --method " + o.method);
    if (!needs_q && o.q != 0) throw ConfigError("--q applies only to spcalda and pcalda");
    if (method == Method::SPCALDA && o.gamma.empty()) throw ConfigError("--gamma is required for spcalda");

    const CsvDataset csv = load_csv(o.input, o.label);
    const LabeledDataset& ds = csv.dataset;
    ReducedLDAModel model;
    switch (method) {
        case Method::SPCALDA: model = fit_spcalda(ds, parse_gamma(o.gamma), o.q, priors); break;
        case Method::PCALDA: model = fit_pcalda(ds, o.q, priors); break;
        case Method::SRRLDA:
            model = fit_srrlda(ds, priors, srrlda_metric_from_string(o.srrlda_metric));
            break;
        case Method::IR: model = fit_diagonal_lda(ds, priors); break;
        case Method::LDA: model = fit_full_lda(ds, priors); break;
        case Method::ORACLE: break;
    }
    nlohmann::json j = model_to_json(model);
    j["label_column"] = csv.label_column;
    j["label_names"] = csv.label_names;
    j["feature_names"] = csv.feature_names;
    write_json_file(o.out, j);

    const Prediction train = predict(model, ds.data());
    out << "fitted " << to_string(model.method) << " on n=" << ds.n() << ", p=" << ds.p()
        << ", K=" << ds.num_classes() << "; reduced dimension " << model.reduced_dim()
        << "; training error " << std::fixed << std::setprecision(4)
        << error_rate(train.labels, ds.labels()) << "\n";
    for (const auto& w : model.warnings) out << "warning: " << w << "\n";
    return kExitOk;
}

int run_predict(const Options& o, std::ostream& out) {
    nlohmann::json j = read_json_file(o.model);
    if (j.value("kind", "") == "cv_report") j = j.at("model");
    const ReducedLDAModel model = model_from_json(j);
    const auto features = j.value("feature_names", std::vector<std::string>{});
    std::vector<std::string> names = j.value("label_names", std::vector<std::string>{});
    if (names.empty()) {
        for (int k = 1; k <= model.num_classes(); ++k) names.push_back(std::to_string(k));
    }
    const FeatureTable table = load_feature_csv(o.input, features);
    const Prediction pred = predict(model, table.values);

    std::ofstream file;
    std::ostream* dest = &out;
    if (!o.out.empty()) {
        file = open_out(o.out);
        dest = &file;
    }
    *dest << "row,label";
    for (const auto& n : names) *dest << ",score_" << n;
    *dest << "\n";
    for (Index i = 0; i < pred.scores.rows(); ++i) {
        *dest << (i + 1) << "," << names[static_cast<std::size_t>(pred.labels[i] - 1)];
        for (Index k = 0; k < pred.scores.cols(); ++k) *dest << "," << format_double(pred.scores(i, k));
        *dest << "\n";
    }
    return kExitOk;
}

void print_cv_table(const CVReport& r, std::ostream& out) {
    out << "# " << to_string(r.method) << " " << r.folds << "-fold CV error (%), seed " << r.seed
        << "\n";
    out << std::left << std::setw(8) << "gamma";
    for (Index q : r.qs) out << std::right << std::setw(8) << ("q=" + std::to_string(q));
    out << "\n";
    for (std::size_t g = 0; g < r.gammas.size(); ++g) {
        out << std::left << std::setw(8) << gamma_text(r.gammas[g]);
        for (std::size_t c = 0; c < r.qs.size(); ++c) {
            std::ostringstream cell;
            cell << std::fixed << std::setprecision(2)
                 << 100.0 * r.error_table(static_cast<Index>(g), static_cast<Index>(c));
            out << std::right << std::setw(8) << cell.str();
        }
        out << "\n";
    }
    out << "selected gamma=" << gamma_text(r.selected_gamma) << " q=" << r.selected_q
        << " error=" << std::fixed << std::setprecision(4) << r.selected_error << "\n";
    if (r.tie_trace.size() > 1) {
        out << "tied cells:";
        for (const auto& [g, q] : r.tie_trace) out << " (" << gamma_text(g) << "," << q << ")";
        out << "\n";
    }
    for (const auto& n : r.notes) out << "note: " << n << "\n";
}

int run_cv(const Options& o, std::ostream& out) {
    require_workers(o.workers);
    const Method method = method_from_string(o.method);
    if (method != Method::SPCALDA && method != Method::PCALDA) {
        throw ConfigError("--method must be spcalda or pcalda for cv");
    }
    if (o.folds < 2) throw ConfigError("--folds must be at least 2");
    const CsvDataset csv = load_csv(o.input, o.label);
    const LabeledDataset& ds = csv.dataset;

    CVGrid grid = CVGrid::defaults(ds, o.seed, o.folds);
    if (!o.gammas.empty()) grid.gammas = parse_gamma_list(o.gammas);
    if (!o.qs.empty()) {
        grid.qs.clear();
        for (long q : parse_int_list(o.qs)) grid.qs.push_back(static_cast<Index>(q));
    }
    if (method == Method::PCALDA && !o.gammas.empty()) {
        throw ConfigError("--gammas does not apply to pcalda (gamma is fixed to 1)");
    }
    const CVReport report = cv_select(ds, grid, method, priors_from_string(o.priors), o.workers);
    print_cv_table(report, out);
    if (!o.out.empty()) {
        nlohmann::json j = cv_report_to_json(report);
        j["model"]["label_column"] = csv.label_column;
        j["model"]["label_names"] = csv.label_names;
        j["model"]["feature_names"] = csv.feature_names;
        write_json_file(o.out, j);
    }
    return kExitOk;
}

int run_simulate(const Options& o, std::ostream& out) {
    if (o.out.empty()) throw ConfigError("--out prefix is required");
    ScenarioSpec spec = ScenarioSpec::make(o.scenario, o.p > 0 ? o.p : 500, o.train_per_class,
                                           o.test_per_class, o.seed);
    spec.validate();
    const ScenarioDraw draw = generate_scenario(spec);
    {
        auto f = open_out(o.out + "_train.csv");
        write_labeled_csv(f, draw.train.data(), draw.train.labels());
    }
    {
        auto f = open_out(o.out + "_test.csv");
        write_labeled_csv(f, draw.test.data(), draw.test.labels());
    }
    {
        std::vector<int> ks;
        for (int k = 1; k <= spec.num_classes; ++k) ks.push_back(k);
        auto f = open_out(o.out + "_means.csv");
        write_labeled_csv(f, draw.means, ks);
    }
    out << "scenario " << spec.id << " (p=" << spec.p << ", seed " << spec.seed << "): wrote "
        << o.out << "_train.csv, " << o.out << "_test.csv, " << o.out << "_means.csv\n";
    return kExitOk;
}

int run_bench(const Options& o, std::ostream& out) {
    require_workers(o.workers);
    BenchmarkConfig cfg;
    cfg.scenarios.clear();
    for (long s : parse_int_list(o.scenarios)) {
        if (s < 1 || s > 6) throw ConfigError("--scenarios entries must lie in 1..6");
        cfg.scenarios.push_back(static_cast<int>(s));
    }
    cfg.methods.clear();
    for (const auto& m : split(o.methods, ',')) {
        const Method method = method_from_string(m);
        if (method == Method::LDA) throw ConfigError("--methods: full LDA is not part of the benchmark");
        cfg.methods.push_back(method);
    }
    if (o.replicates < 1) throw ConfigError("--replicates must be at least 1");
    if (o.folds < 2) throw ConfigError("--folds must be at least 2");
    if (o.q_cap < 1) throw ConfigError("--q-cap must be at least 1");
    cfg.replicates = o.replicates;
    cfg.master_seed = o.seed;
    cfg.p = o.p > 0 ? o.p : 100;
    cfg.train_per_class = o.train_per_class;
    cfg.test_per_class = o.test_per_class;
    cfg.folds = o.folds;
    if (!o.gammas.empty()) cfg.gammas = parse_gamma_list(o.gammas);
    cfg.q_cap = o.q_cap;
    cfg.priors = priors_from_string(o.priors);
    cfg.srrlda_metric = srrlda_metric_from_string(o.srrlda_metric);
    cfg.workers = o.workers;
    for (int s : cfg.scenarios) ScenarioSpec::make(s, cfg.p, cfg.train_per_class, cfg.test_per_class).validate();

    const BenchmarkReport report = run_benchmark(cfg);
    const std::string table = report.text_table();
    out << table;
    if (!o.out_text.empty()) open_out(o.out_text) << table;
    if (!o.out_csv.empty()) open_out(o.out_csv) << report.csv();
    return kExitOk;
}

int run_verify(std::ostream& out) {
    const auto results = run_verification_battery();
    std::size_t width = 5;
    for (const auto& r : results) width = std::max(width, r.name.size());
    out << std::left << std::setw(static_cast<int>(width) + 2) << "check" << std::setw(14)
        << "measured" << std::setw(14) << "threshold" << "result\n";
    bool all = true;
    for (const auto& r : results) {
        std::ostringstream m, t;
        m << std::scientific << std::setprecision(3) << r.measured;
        t << (r.expect_below ? "< " : "> ") << std::scientific << std::setprecision(0) << r.threshold;
        out << std::left << std::setw(static_cast<int>(width) + 2) << r.name << std::setw(14) << m.str()
            << std::setw(14) << t.str() << (r.passed ? "PASS" : "FAIL") << "\n";
        all = all && r.passed;
    }
    out << (all ? "all checks passed\n" : "some checks FAILED\n");
    return all ? kExitOk : kExitData;
}

}  // namespace

std::vector<double> parse_gamma_list(const std::string& text) {
    std::vector<double> out;
    for (const auto& t : split(text, ',')) {
        if (t.empty()) throw ConfigError("empty entry in gamma list '" + text + "'");
        out.push_back(parse_gamma(t));
    }
    if (out.empty()) throw ConfigError("empty gamma list");
    return out;
}

std::vector<long> parse_int_list(const std::string& text) {
    std::vector<long> out;
    for (const auto& t : split(text, ',')) {
        if (t.empty()) throw ConfigError("empty entry in list '" + text + "'");
        const auto dash = t.find('-', 1);
        if (dash == std::string::npos) {
            out.push_back(parse_long(t));
            continue;
        }
        const long a = parse_long(t.substr(0, dash));
        const long b = parse_long(t.substr(dash + 1));
        if (b < a) throw ConfigError("descending range '" + t + "'");
        for (long v = a; v <= b; ++v) out.push_back(v);
    }
    if (out.empty()) throw ConfigError("empty list");
    return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Supervised-PCA reduced-rank LDA", "spcalda"};
    app.require_subcommand(1);
    Options o;

    auto* fit = app.add_subcommand("fit", "Fit a classifier and save it as JSON");
    fit->add_option("--method", o.method, "spcalda | pcalda | srrlda | ir | lda")->capture_default_str();
    fit->add_option("--gamma", o.gamma, "Weight of the between-class scatter (number or inf)");
    fit->add_option("--q", o.q, "Number of projection directions");
    fit->add_option("--input", o.input, "Training CSV with a header row")->required();
    fit->add_option("--label", o.label, "Name of the label column")->capture_default_str();
    fit->add_option("--out", o.out, "Model file to write")->required();
    fit->add_option("--priors", o.priors, "empirical | equal")->capture_default_str();
    fit->add_option("--srrlda-metric", o.srrlda_metric, "euclidean | within")->capture_default_str();

    auto* pred = app.add_subcommand("predict", "Apply a saved model to a CSV");
    pred->add_option("--model", o.model, "Model file (or CV report)")->required();
    pred->add_option("--input", o.input, "CSV containing the model's feature columns")->required();
    pred->add_option("--out", o.out, "Output CSV (default: standard output)");

    auto* cv = app.add_subcommand("cv", "Select (gamma, q) by stratified k-fold cross-validation");
    cv->add_option("--input", o.input, "Training CSV")->required();
    cv->add_option("--label", o.label, "Name of the label column")->capture_default_str();
    cv->add_option("--method", o.method, "spcalda | pcalda")->capture_default_str();
    cv->add_option("--folds", o.folds, "Number of folds")->capture_default_str();
    cv->add_option("--seed", o.seed, "Fold assignment seed")->capture_default_str();
    cv->add_option("--gammas", o.gammas, "Comma list, e.g. 0.5,1,4,inf (default grid otherwise)");
    cv->add_option("--qs", o.qs, "Comma list or ranges, e.g. 1-10");
    cv->add_option("--priors", o.priors, "empirical | equal")->capture_default_str();
    cv->add_option("--out", o.out, "Report file to write");
    cv->add_option("--workers", o.workers, "Worker threads")->capture_default_str();

    auto* sim = app.add_subcommand("simulate", "Write one draw of a simulation scenario as CSV");
    sim->add_option("--scenario", o.scenario, "Scenario id 1..6")->capture_default_str();
    sim->add_option("--seed", o.seed, "Seed")->capture_default_str();
    sim->add_option("--p", o.p, "Dimension (multiple of 4, default 500)");
    sim->add_option("--train-per-class", o.train_per_class)->capture_default_str();
    sim->add_option("--test-per-class", o.test_per_class)->capture_default_str();
    sim->add_option("--out", o.out, "Output prefix")->required();

    auto* bench = app.add_subcommand("bench", "Run the simulation benchmark");
    bench->add_option("--scenarios", o.scenarios, "Ids, e.g. 1-6 or 1,3")->capture_default_str();
    bench->add_option("--replicates", o.replicates)->capture_default_str();
    bench->add_option("--seed", o.seed, "Master seed")->capture_default_str();
    bench->add_option("--p", o.p, "Dimension (multiple of 4, default 100)");
    bench->add_option("--methods", o.methods)->capture_default_str();
    bench->add_option("--folds", o.folds)->capture_default_str();
    bench->add_option("--gammas", o.gammas, "Gamma grid (default grid otherwise)");
    bench->add_option("--q-cap", o.q_cap, "Largest q in the CV grid")->capture_default_str();
    bench->add_option("--train-per-class", o.train_per_class)->capture_default_str();
    bench->add_option("--test-per-class", o.test_per_class)->capture_default_str();
    bench->add_option("--priors", o.priors, "empirical | equal")->capture_default_str();
    bench->add_option("--srrlda-metric", o.srrlda_metric, "euclidean | within")->capture_default_str();
    bench->add_option("--workers", o.workers, "Worker threads")->capture_default_str();
    bench->add_option("--out-csv", o.out_csv, "Per-replicate CSV");
    bench->add_option("--out-text", o.out_text, "Summary table");

    auto* verify = app.add_subcommand("verify", "Run the built-in numerical verifiers");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*fit) return run_fit(o, out);
        if (*pred) return run_predict(o, out);
        if (*cv) return run_cv(o, out);
        if (*sim) return run_simulate(o, out);
        if (*bench) return run_bench(o, out);
        if (*verify) return run_verify(out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}

int cli_main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace spcalda
