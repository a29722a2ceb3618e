// Command-line front end: graph generation, cascade simulation, graph
// inference, experiment orchestration and solver diagnostics. Every command
// writes a JSON manifest next to its artifacts listing exactly the files it
// produced, so runs can be audited and reproduced.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "glc/cascade.hpp"
#include "glc/config.hpp"
#include "glc/diagnostics.hpp"
#include "glc/errors.hpp"
#include "glc/eval.hpp"
#include "glc/graph.hpp"
#include "glc/parallel.hpp"
#include "glc/recovery.hpp"
#include "glc/rng.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using ordered_json = nlohmann::ordered_json;

std::string timestamp_utc() {
    std::time_t t = 0;
    if (const char* env = std::getenv("SOURCE_DATE_EPOCH"))
        t = static_cast<std::time_t>(std::strtoll(env, nullptr, 10));
    else
        t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_manifest(const std::string& path, const std::string& command,
                    const std::vector<std::string>& argv_echo, const ordered_json& config_echo,
                    uint64_t seed, const std::vector<std::string>& outputs) {
    ordered_json m;
    m["tool"] = "glc";
    m["version"] = kVersion;
    m["command"] = command;
    m["argv"] = argv_echo;
    m["seed"] = seed;
    m["config"] = config_echo;
    m["timestamp"] = timestamp_utc();
    m["outputs"] = outputs;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw glc::data_error("cannot open '" + path + "' for writing");
    out << m.dump(2) << '\n';
    out.flush();
    if (!out) throw glc::data_error("write to '" + path + "' failed");
}

glc::ModelKind model_kind_flag(const std::string& name) {
    try {
        return glc::model_from_name(name);
    } catch (const std::exception&) {
        throw glc::param_error("unknown model '" + name +
                               "' (expected ic | voter | cice | logistic)");
    }
}

struct ModelFlags {
    double epsilon = 1.0;
    double threshold = 0.0;
    int32_t horizon = 10;

    void attach(CLI::App* cmd) {
        cmd->add_option("--epsilon", epsilon, "rate scale of the saturating exponential link");
        cmd->add_option("--threshold", threshold, "offset of the logistic link");
        cmd->add_option("--horizon", horizon, "voter step count / extra cap for other models");
    }
    glc::CascadeModel build(glc::ModelKind kind) const {
        glc::CascadeModel model{kind, epsilon, threshold, horizon};
        model.validate();
        return model;
    }
};

// ---- generate --------------------------------------------------------------

struct GenerateArgs {
    std::string kind;
    std::string model = "ic";
    int32_t nodes = 0;
    int32_t k = 0;
    int64_t edges_target = 0;
    double beta = 0.1;
    double p_triad = 0.25;
    std::vector<double> initiator{0.9, 0.5, 0.5, 0.3};
    int32_t power = 0;
    double wlow = 0.2;
    double whigh = 0.7;
    double weak_prob = 0.0;
    double weak_low = 0.0;
    double weak_high = 0.1;
    uint64_t seed = 0;
    std::string out = "graph.tsv";
};

int run_generate(const GenerateArgs& a, const std::vector<std::string>& argv_echo) {
    glc::GraphSpec spec;
    spec.kind = a.kind;
    spec.nodes = a.power > 0 ? (1 << a.power) : a.nodes;
    spec.k = a.k;
    spec.edges_target = a.edges_target;
    spec.beta = a.beta;
    spec.p_triad = a.p_triad;
    spec.power = a.power;
    if (a.initiator.size() != 4)
        throw glc::param_error("--initiator needs exactly 4 values");
    for (size_t i = 0; i < 4; ++i) spec.initiator[i] = a.initiator[i];
    if (spec.nodes <= 0) throw glc::param_error("--nodes (or --power) must be positive");
    spec.name = spec.kind + std::to_string(spec.nodes);

    const glc::ModelKind model = model_kind_flag(a.model);
    const glc::GraphTopology topo = glc::build_topology(spec, glc::derive_seed(a.seed, {0}));
    glc::Graph graph =
        glc::assign_weights(topo, model, a.wlow, a.whigh, glc::derive_seed(a.seed, {1}));
    if (a.weak_prob > 0.0)
        graph = glc::add_weak_edges(graph, a.weak_prob, a.weak_low, a.weak_high,
                                    glc::derive_seed(a.seed, {2}));
    glc::write_graph(graph, a.out);

    ordered_json echo;
    echo["kind"] = a.kind;
    echo["model"] = a.model;
    echo["nodes"] = spec.nodes;
    echo["k"] = a.k;
    echo["edges_target"] = a.edges_target;
    echo["beta"] = a.beta;
    echo["p_triad"] = a.p_triad;
    echo["initiator"] = a.initiator;
    echo["power"] = a.power;
    echo["wlow"] = a.wlow;
    echo["whigh"] = a.whigh;
    echo["weak_prob"] = a.weak_prob;
    echo["weak_low"] = a.weak_low;
    echo["weak_high"] = a.weak_high;
    echo["edges_written"] = graph.num_edges();
    write_manifest(a.out + ".manifest.json", "generate", argv_echo, echo, a.seed, {a.out});
    return 0;
}

// ---- simulate ---------------------------------------------------------------

struct SimulateArgs {
    std::string graph;
    int64_t n = 0;
    double p_init = 0.05;
    uint64_t seed = 0;
    std::string out = "traces.jsonl";
    ModelFlags model;
};

int run_simulate(const SimulateArgs& a, const std::vector<std::string>& argv_echo) {
    if (a.n < 1) throw glc::param_error("--n must be >= 1");
    if (!(a.p_init > 0.0 && a.p_init <= 1.0))
        throw glc::param_error("--p-init must lie in (0, 1]");
    const glc::Graph graph = glc::read_graph(a.graph);
    const glc::CascadeModel model = a.model.build(graph.model());
    const auto traces =
        glc::batch_simulate(graph, model, static_cast<int32_t>(a.n), a.p_init, a.seed);
    glc::write_traces(traces, a.out);

    ordered_json echo;
    echo["graph"] = a.graph;
    echo["model"] = glc::model_name(graph.model());
    echo["epsilon"] = a.model.epsilon;
    echo["threshold"] = a.model.threshold;
    echo["horizon"] = a.model.horizon;
    echo["n"] = a.n;
    echo["p_init"] = a.p_init;
    write_manifest(a.out + ".manifest.json", "simulate", argv_echo, echo, a.seed, {a.out});
    return 0;
}

// ---- infer ------------------------------------------------------------------

struct InferArgs {
    std::string traces;
    int32_t nodes = 0;
    std::string estimator = "sparse-mle";
    std::string model;  // optional assertion against the trace header
    double lambda = -1.0;
    bool lambda_set = false;
    double alpha = -1.0;
    bool alpha_set = false;
    double delta = 0.0;
    double eta = 0.1;
    int32_t max_parents = 16;
    int32_t jobs = 0;
    std::string out = "estimate.tsv";
    ModelFlags model_flags;
};

int run_infer(const InferArgs& a, const std::vector<std::string>& argv_echo) {
    const auto traces = glc::read_traces(a.traces);
    if (traces.empty()) throw glc::data_error("'" + a.traces + "' holds no traces");
    if (a.nodes <= 0) throw glc::param_error("--nodes must be positive");
    const glc::ModelKind kind = traces.front().kind;
    if (!a.model.empty() && model_kind_flag(a.model) != kind)
        throw glc::param_error("trace/model mismatch: traces are '" + glc::model_name(kind) +
                               "' but --model says '" + a.model + "'");
    const glc::CascadeModel model = a.model_flags.build(kind);

    glc::InferOptions opt;
    opt.estimator = glc::estimator_from_name(a.estimator);
    const bool regularized =
        opt.estimator == glc::Estimator::sparse_mle || opt.estimator == glc::Estimator::lasso;
    if (a.lambda_set && a.alpha_set)
        throw glc::param_error("pass exactly one of --lambda / --alpha");
    if (regularized) {
        if (a.lambda_set)
            opt.lambda = glc::LambdaRule::fixed(a.lambda);
        else if (a.alpha_set)
            opt.lambda = glc::LambdaRule::theorem(a.alpha, a.delta);
        else
            throw glc::param_error("estimator '" + a.estimator +
                                   "' needs --lambda or --alpha/--delta");
    } else if (a.lambda_set || a.alpha_set) {
        throw glc::param_error("estimator '" + a.estimator + "' takes neither --lambda nor --alpha");
    }
    opt.eta = a.eta;
    opt.max_parents = a.max_parents;
    opt.jobs = a.jobs > 0 ? a.jobs : glc::default_jobs();

    const glc::GraphEstimate estimate = glc::infer_graph(traces, a.nodes, model, opt);
    glc::write_graph(estimate.graph, a.out);

    const std::string sidecar = a.out + ".nodes.jsonl";
    {
        std::ofstream side(sidecar, std::ios::binary);
        if (!side) throw glc::data_error("cannot open '" + sidecar + "' for writing");
        for (const glc::NodeSolve& ns : estimate.nodes) {
            ordered_json row;
            row["node"] = ns.node;
            if (ns.skipped) {
                row["skipped"] = true;
            } else {
                row["n"] = ns.result.n;
                row["lambda"] = ns.result.lambda;
                row["iterations"] = ns.result.iterations;
                row["converged"] = ns.result.converged;
                row["objective"] = ns.result.objective;
            }
            side << row.dump() << '\n';
        }
        side.flush();
        if (!side) throw glc::data_error("write to '" + sidecar + "' failed");
    }

    ordered_json echo;
    echo["traces"] = a.traces;
    echo["nodes"] = a.nodes;
    echo["model"] = glc::model_name(kind);
    echo["epsilon"] = a.model_flags.epsilon;
    echo["threshold"] = a.model_flags.threshold;
    echo["horizon"] = a.model_flags.horizon;
    echo["estimator"] = a.estimator;
    if (a.lambda_set) echo["lambda"] = a.lambda;
    if (a.alpha_set) {
        echo["alpha"] = a.alpha;
        echo["delta"] = a.delta;
    }
    echo["eta"] = a.eta;
    echo["max_parents"] = a.max_parents;
    write_manifest(a.out + ".manifest.json", "infer", argv_echo, echo, 0, {a.out, sidecar});
    return 0;
}

// ---- experiment -------------------------------------------------------------

struct ExperimentArgs {
    std::string config;
    std::string output_dir;  // overrides config when nonempty
    int32_t jobs = 0;
    uint64_t master_seed = 0;
    bool seed_set = false;
};

int run_experiment_cmd(const ExperimentArgs& a, const std::vector<std::string>& argv_echo) {
    glc::ExperimentConfig cfg = glc::load_experiment_config(a.config);
    if (!a.output_dir.empty()) cfg.output_dir = a.output_dir;
    if (a.seed_set) cfg.master_seed = a.master_seed;
    const int32_t jobs = a.jobs > 0 ? a.jobs : glc::default_jobs();

    const glc::ExperimentResult result = glc::run_experiment(cfg, jobs);

    std::stringstream raw;
    {
        std::ifstream in(a.config, std::ios::binary);
        raw << in.rdbuf();
    }
    ordered_json echo;
    echo["config_file"] = a.config;
    echo["config_text"] = raw.str();
    echo["output_dir"] = cfg.output_dir;
    echo["rows"] = result.rows.size();
    const std::string manifest_path =
        (std::filesystem::path(cfg.output_dir) / "manifest.json").string();
    write_manifest(manifest_path, "experiment", argv_echo, echo, cfg.master_seed, result.files);
    return 0;
}

// ---- diagnose ---------------------------------------------------------------

struct DiagnoseArgs {
    std::string graph;
    std::string traces;
    int32_t node = -1;
    int64_t re_samples = 10000;
    uint64_t seed = 1;
    std::string out = "diagnostics.json";
    bool concentration = false;
    std::vector<int64_t> n_grid{250, 500, 1000, 2000};
    int32_t trials = 5;
    double p_init = 0.05;
    std::string concentration_out = "concentration.csv";
    ModelFlags model_flags;
};

int run_diagnose(const DiagnoseArgs& a, const std::vector<std::string>& argv_echo) {
    const glc::Graph graph = glc::read_graph(a.graph);
    if (a.node < 0 || a.node >= graph.num_nodes())
        throw glc::param_error("--node out of range for a graph on " +
                               std::to_string(graph.num_nodes()) + " nodes");
    const glc::CascadeModel model = a.model_flags.build(graph.model());
    std::vector<std::string> outputs;

    ordered_json report;
    report["node"] = a.node;

    if (!a.traces.empty()) {
        const auto traces = glc::read_traces(a.traces);
        const glc::MeasurementSet ms =
            glc::pool_measurements(traces, graph.num_nodes(), a.node);
        if (ms.empty())
            throw glc::data_error("traces contain no measurements for node " +
                                  std::to_string(a.node));
        const std::vector<double> theta_star = graph.column(a.node);
        const std::vector<int32_t> support = graph.parents(a.node);
        if (support.empty())
            throw glc::param_error("node " + std::to_string(a.node) +
                                   " has no parents; restricted-eigenvalue support is empty");
        const Eigen::MatrixXd hessian = glc::nll_hessian(theta_star, ms, model);
        const glc::ReEstimate re = glc::re_estimate(hessian, support, a.re_samples, a.seed);
        const glc::LfConstants lf = glc::lf_constants(model, ms, theta_star);
        report["rows"] = ms.rows();
        report["support_size"] = support.size();
        report["gamma_upper"] = re.gamma_upper;
        report["gamma_sampled"] = re.gamma_sampled;
        report["re_samples"] = re.num_samples;
        report["alpha_lf"] = lf.alpha_lf;
        report["alpha_lf2"] = lf.alpha_lf2;
        report["rows_used"] = lf.rows_used;
    }

    if (a.concentration) {
        const glc::ConcentrationReport conc = glc::hessian_concentration(
            graph, model, a.node, a.n_grid, a.trials, a.p_init, a.re_samples, a.seed);
        glc::write_concentration_csv(conc, a.concentration_out);
        outputs.push_back(a.concentration_out);
        report["gamma_expected"] = conc.gamma_expected;
        report["oracle_n"] = conc.oracle_n;
        ordered_json summary = ordered_json::array();
        for (const auto& s : conc.summary) {
            ordered_json row;
            row["n"] = s.n;
            row["median_max_dev"] = s.median_max_dev;
            row["fraction_ge_half"] = s.fraction_ge_half;
            summary.push_back(row);
        }
        report["concentration_summary"] = summary;
    }

    if (a.traces.empty() && !a.concentration)
        throw glc::param_error("nothing to do: pass --traces and/or --concentration");

    {
        std::ofstream out(a.out, std::ios::binary);
        if (!out) throw glc::data_error("cannot open '" + a.out + "' for writing");
        out << report.dump(2) << '\n';
        out.flush();
        if (!out) throw glc::data_error("write to '" + a.out + "' failed");
    }
    outputs.insert(outputs.begin(), a.out);

    ordered_json echo;
    echo["graph"] = a.graph;
    echo["traces"] = a.traces;
    echo["node"] = a.node;
    echo["re_samples"] = a.re_samples;
    echo["concentration"] = a.concentration;
    if (a.concentration) {
        echo["n_grid"] = a.n_grid;
        echo["trials"] = a.trials;
        echo["p_init"] = a.p_init;
    }
    write_manifest(a.out + ".manifest.json", "diagnose", argv_echo, echo, a.seed, outputs);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"glc: cascade simulation and graph recovery toolkit"};
    app.set_version_flag("--version", std::string("glc ") + kVersion);
    app.require_subcommand(1);

    std::vector<std::string> argv_echo(argv, argv + argc);

    GenerateArgs gen;
    CLI::App* generate = app.add_subcommand("generate", "generate a weighted directed graph");
    generate->add_option("--kind", gen.kind, "ba | ws | holme-kim | kronecker")->required();
    generate->add_option("--model", gen.model, "ic | voter | cice | logistic");
    generate->add_option("--nodes", gen.nodes, "node count (kronecker: a power of two)");
    generate->add_option("--k", gen.k, "attachment/neighbor parameter");
    generate->add_option("--edges-target", gen.edges_target,
                         "directed edge-count target (used when --k is absent)");
    generate->add_option("--beta", gen.beta, "ws rewiring probability");
    generate->add_option("--p-triad", gen.p_triad, "holme-kim triangle probability");
    generate->add_option("--initiator", gen.initiator, "kronecker 2x2 initiator (4 values)")
        ->expected(4);
    generate->add_option("--power", gen.power, "kronecker power (nodes = 2^power)");
    generate->add_option("--wlow", gen.wlow, "weight range low end (probability scale)");
    generate->add_option("--whigh", gen.whigh, "weight range high end");
    generate->add_option("--weak-prob", gen.weak_prob,
                         "probability of adding each absent pair as a weak edge");
    generate->add_option("--weak-low", gen.weak_low, "weak-edge range low end");
    generate->add_option("--weak-high", gen.weak_high, "weak-edge range high end");
    generate->add_option("--seed", gen.seed, "master seed")->required();
    generate->add_option("--out", gen.out, "output TSV path");

    SimulateArgs sim;
    CLI::App* simulate = app.add_subcommand("simulate", "simulate cascades over a graph");
    simulate->add_option("--graph", sim.graph, "input graph TSV")->required();
    simulate->add_option("--n", sim.n, "number of cascades")->required();
    simulate->add_option("--p-init", sim.p_init, "per-node source probability");
    simulate->add_option("--seed", sim.seed, "master seed")->required();
    simulate->add_option("--out", sim.out, "output JSONL path");
    sim.model.attach(simulate);

    InferArgs inf;
    CLI::App* infer = app.add_subcommand("infer", "recover a graph from traces");
    infer->add_option("--traces", inf.traces, "input JSONL traces")->required();
    infer->add_option("--nodes", inf.nodes, "node-universe size")->required();
    infer->add_option("--estimator", inf.estimator, "sparse-mle | mle | lasso | greedy");
    infer->add_option("--model", inf.model, "assert the trace model kind");
    infer->add_option("--lambda", inf.lambda, "fixed l1 weight")
        ->trigger_on_parse()
        ->each([&inf](const std::string&) { inf.lambda_set = true; });
    infer->add_option("--alpha", inf.alpha, "link-regularity bound for the lambda rule")
        ->trigger_on_parse()
        ->each([&inf](const std::string&) { inf.alpha_set = true; });
    infer->add_option("--delta", inf.delta, "lambda rule exponent offset");
    infer->add_option("--eta", inf.eta, "support threshold");
    infer->add_option("--max-parents", inf.max_parents, "greedy parent cap");
    infer->add_option("--jobs", inf.jobs, "worker threads (default: hardware)");
    infer->add_option("--out", inf.out, "output estimate TSV path");
    inf.model_flags.attach(infer);

    ExperimentArgs exp;
    CLI::App* experiment = app.add_subcommand("experiment", "run a factorial benchmark config");
    experiment->add_option("--config", exp.config, "experiment config file")->required();
    experiment->add_option("--output-dir", exp.output_dir, "override [run] output_dir");
    experiment->add_option("--jobs", exp.jobs, "worker threads (default: hardware)");
    experiment->add_option("--master-seed", exp.master_seed, "override [run] master_seed")
        ->trigger_on_parse()
        ->each([&exp](const std::string&) { exp.seed_set = true; });

    DiagnoseArgs diag;
    CLI::App* diagnose = app.add_subcommand("diagnose", "recovery-condition diagnostics");
    diagnose->add_option("--graph", diag.graph, "ground-truth graph TSV")->required();
    diagnose->add_option("--traces", diag.traces, "traces for the empirical Hessian");
    diagnose->add_option("--node", diag.node, "target node")->required();
    diagnose->add_option("--re-samples", diag.re_samples, "cone sample count");
    diagnose->add_option("--seed", diag.seed, "sampling seed");
    diagnose->add_option("--out", diag.out, "output JSON path");
    diagnose->add_flag("--concentration", diag.concentration,
                       "also run the sample-Hessian concentration study");
    diagnose->add_option("--n-grid", diag.n_grid, "concentration cascade counts");
    diagnose->add_option("--trials", diag.trials, "concentration trials per n");
    diagnose->add_option("--p-init", diag.p_init, "concentration source probability");
    diagnose->add_option("--concentration-out", diag.concentration_out,
                         "concentration CSV path");
    diag.model_flags.attach(diagnose);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (generate->parsed()) return run_generate(gen, argv_echo);
        if (simulate->parsed()) return run_simulate(sim, argv_echo);
        if (infer->parsed()) return run_infer(inf, argv_echo);
        if (experiment->parsed()) return run_experiment_cmd(exp, argv_echo);
        if (diagnose->parsed()) return run_diagnose(diag, argv_echo);
    } catch (const glc::param_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const glc::data_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const glc::numerical_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    }
    return 0;
}
