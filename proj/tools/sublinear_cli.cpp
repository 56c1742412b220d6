// Command-line front end: dot, train, eval, synth, bench, protocol.
//
// Exit codes: 0 success, 1 validation error, 2 I/O error, 3 infeasible spec.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sublinear/sublinear.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sublinear;

namespace {

struct Globals {
    std::optional<std::string> matcher;
    std::optional<std::size_t> exact_max_order;
    std::optional<std::uint64_t> seed;
    std::string config;
    std::string out;
};

/// Config file contents plus the directory relative paths resolve against.
struct Config {
    json doc = json::object();
    fs::path base = fs::current_path();

    fs::path resolve(const std::string& p) const {
        fs::path path(p);
        return path.is_absolute() ? path : base / path;
    }
};

Config load_config(const Globals& g) {
    Config c;
    if (g.config.empty()) return c;
    c.doc = read_json_file(g.config);
    if (!c.doc.is_object()) throw ValidationError(g.config + ": config must be a JSON object");
    c.base = fs::absolute(g.config).parent_path();
    return c;
}

MatcherConfig matcher_config(const Globals& g, const Config& c) {
    MatcherConfig m = c.doc.contains("matcher") ? matcher_from_json(c.doc.at("matcher")) : MatcherConfig{};
    if (g.matcher) m.method = parse_match_method(*g.matcher);
    if (g.exact_max_order) m.exact_max_order = *g.exact_max_order;
    m.validate();
    return m;
}

std::uint64_t seed_of(const Globals& g, const Config& c) {
    if (g.seed) return *g.seed;
    return c.doc.value("seed", std::uint64_t{0});
}

TrainConfig train_config(const Globals& g, const Config& c) {
    TrainConfig t;
    if (c.doc.contains("train")) {
        const auto& j = c.doc.at("train");
        t.learning_rate = j.value("learning_rate", t.learning_rate);
        t.margin = j.value("margin", t.margin);
        t.max_epochs = j.value("max_epochs", t.max_epochs);
        if (j.contains("weight_order")) t.weight_order = j.at("weight_order").get<std::size_t>();
        t.shuffle = j.value("shuffle", t.shuffle);
        t.stop_when_separated = j.value("stop_when_separated", t.stop_when_separated);
    }
    t.seed = seed_of(g, c);
    t.matcher = matcher_config(g, c);
    t.validate();
    return t;
}

/// A dataset reference is a native directory path or
/// {"format": "iam", "path": DIR, "gxl_config": FILE-or-object}.
Dataset load_dataset(const json& ref, const Config& c, bool standardize) {
    Dataset ds;
    if (ref.is_string()) {
        ds = read_dataset(c.resolve(ref.get<std::string>()));
    } else if (ref.is_object()) {
        const auto format = ref.value("format", std::string("jsonl"));
        const auto path = c.resolve(ref.at("path").get<std::string>());
        if (format == "iam" || format == "gxl") {
            if (!ref.contains("gxl_config")) throw ValidationError("IAM dataset reference needs gxl_config");
            const auto& gc = ref.at("gxl_config");
            const auto cfg = gc.is_string() ? GxlAttrConfig::load(c.resolve(gc.get<std::string>()))
                                            : GxlAttrConfig::from_json(gc);
            ds = read_iam_dataset(path, cfg);
        } else if (format == "jsonl") {
            ds = read_dataset(path);
        } else {
            throw ValidationError("unknown dataset format '" + format + "'");
        }
    } else {
        throw ValidationError("dataset reference must be a path or an object");
    }
    if (standardize) standardize_node_attributes(ds);
    return ds;
}

Dataset dataset_from(const Globals&, const Config& c, const std::string& dataset_flag, const std::string& gxl_flag) {
    json ref;
    if (!dataset_flag.empty()) {
        ref = gxl_flag.empty() ? json(dataset_flag) : json{{"format", "iam"}, {"path", dataset_flag},
                                                             {"gxl_config", gxl_flag}};
    } else if (c.doc.contains("dataset")) {
        ref = c.doc.at("dataset");
    } else {
        throw ValidationError("no dataset given (use --dataset or a \"dataset\" entry in --config)");
    }
    // Paths given on the command line are relative to the working directory.
    Config where = c;
    if (!dataset_flag.empty()) where.base = fs::current_path();
    return load_dataset(ref, where, c.doc.value("standardize", false));
}

fs::path out_dir(const Globals& g) {
    if (g.out.empty()) return {};
    fs::create_directories(g.out);
    return g.out;
}

/// Graph file: native JSON object {"nodes", "edges"} or a .gxl document.
AttributedGraph load_graph(const fs::path& p, const std::string& gxl_config) {
    if (p.extension() == ".gxl") {
        if (gxl_config.empty()) throw ValidationError("reading " + p.string() + " needs --gxl-config");
        return parse_gxl_file(p, GxlAttrConfig::load(gxl_config));
    }
    return graph_from_json(read_json_file(p));
}

std::string confusion_table(const std::vector<std::string>& classes,
                            const std::vector<std::vector<std::size_t>>& m) {
    std::size_t w = std::string("true\\pred").size();
    for (const auto& c : classes) w = std::max(w, c.size());
    for (const auto& row : m)
        for (auto v : row) w = std::max(w, std::to_string(v).size());
    std::ostringstream os;
    auto cell = [&](const std::string& s) { os << std::string(w + 2 - s.size(), ' ') << s; };
    cell("true\\pred");
    for (const auto& c : classes) cell(c);
    os << '\n';
    for (std::size_t i = 0; i < classes.size(); ++i) {
        cell(classes[i]);
        for (auto v : m[i]) cell(std::to_string(v));
        os << '\n';
    }
    return os.str();
}

// ---- verbs ------------------------------------------------------------------

int cmd_dot(const Globals& g, const std::string& a, const std::string& b, const std::string& gxl) {
    const Config c = load_config(g);
    const auto x = load_graph(a, gxl), y = load_graph(b, gxl);
    const auto res = sdp(x, y, matcher_config(g, c));
    json pairs = json::array();
    for (const auto& [i, r] : res.match.pairs()) pairs.push_back({i, r});
    const json out = {{"value", res.value}, {"match", pairs}, {"exact", res.exact}};
    std::cout << out.dump() << '\n';
    if (auto dir = out_dir(g); !dir.empty()) write_json_file(out, dir / "dot.json");
    return 0;
}

int cmd_train(const Globals& g, const std::string& dataset, const std::string& gxl, const std::string& split) {
    const Config c = load_config(g);
    const Dataset ds = dataset_from(g, c, dataset, gxl);
    const TrainConfig tc = train_config(g, c);
    const auto& recs = ds.split(split);
    if (recs.empty()) throw ValidationError("split '" + split + "' has no examples");
    auto trained = train_classifier(recs, ds.class_set, tc);
    trained.classifier.training_metadata = {
        {"dataset", ds.name},      {"split", split},          {"learning_rate", tc.learning_rate},
        {"margin", tc.margin},     {"max_epochs", tc.max_epochs}, {"seed", tc.seed},
        {"examples", recs.size()}, {"provenance", ds.provenance}};

    std::size_t epochs = 0;
    bool converged = true;
    for (const auto& t : trained.traces) {
        epochs = std::max<std::size_t>(epochs, static_cast<std::size_t>(t.final_epoch));
        converged = converged && t.converged;
    }
    trained.classifier.training_metadata["converged"] = converged;

    const auto dir = out_dir(g);
    if (!dir.empty()) {
        write_json_file(classifier_to_json(trained.classifier), dir / "model.json");
        std::ofstream trace(dir / "trace.jsonl");
        if (!trace) throw IoError("cannot write " + (dir / "trace.jsonl").string());
        for (std::size_t m = 0; m < trained.traces.size(); ++m)
            for (const auto& r : trained.traces[m].epochs) {
                json line = {{"epoch", r.epoch}, {"updates", r.updates}, {"errors", r.errors}, {"risk", r.risk}};
                if (trained.traces.size() > 1) line["member"] = trained.classifier.classes[m];
                trace << line.dump() << '\n';
            }
    }
    std::printf("trained %s classifier on %zu graphs (%zu classes): %zu epochs, %s\n",
                trained.classifier.is_binary() ? "binary" : "one-against-all", recs.size(), ds.class_set.size(),
                epochs, converged ? "converged" : "not converged");
    std::printf("training accuracy %.4f\n", accuracy(trained.classifier, recs));
    return 0;
}

int cmd_eval(const Globals& g, const std::string& model_path, const std::string& dataset, const std::string& gxl,
             const std::string& split, bool as_json) {
    const Config c = load_config(g);
    if (model_path.empty()) throw ValidationError("eval needs --model");
    GraphClassifier clf = classifier_from_json(read_json_file(model_path));
    if (g.matcher || g.exact_max_order || c.doc.contains("matcher")) clf.set_matcher(matcher_config(g, c));
    const Dataset ds = dataset_from(g, c, dataset, gxl);
    const auto& recs = ds.split(split);
    const double acc = accuracy(clf, recs);
    const auto cm = confusion_matrix(clf, recs);
    const json out = {{"split", split}, {"examples", recs.size()}, {"accuracy", acc},
                      {"classes", clf.classes}, {"confusion_matrix", cm}};
    if (as_json) {
        std::cout << out.dump(2) << '\n';
    } else {
        std::printf("split     %s (%zu graphs)\naccuracy  %.4f\n\n", split.c_str(), recs.size(), acc);
        std::cout << confusion_table(clf.classes, cm);
    }
    if (auto dir = out_dir(g); !dir.empty()) write_json_file(out, dir / "eval.json");
    return 0;
}

int cmd_synth(const Globals& g) {
    const Config c = load_config(g);
    SyntheticSpec spec = SyntheticSpec::from_json(c.doc.contains("synthetic") ? c.doc.at("synthetic") : c.doc);
    if (g.seed) spec.seed = *g.seed;
    if (g.exact_max_order) spec.exact_max_order = *g.exact_max_order;
    spec.validate();
    const auto dir = out_dir(g);
    if (dir.empty()) throw ValidationError("synth needs --out");
    auto syn = generate_synthetic(spec);
    syn.dataset.name = dir.filename().string();
    write_dataset(syn.dataset, dir);
    GraphClassifier planted;
    planted.classes = {"pos", "neg"};
    planted.model = syn.planted;
    planted.training_metadata = {{"planted", true}, {"margin_certificate", syn.margin_certificate}};
    write_json_file(classifier_to_json(planted), dir / "planted_model.json");
    std::printf("wrote %s: train %zu, validation %zu, test %zu; margin certificate %.6g\n", dir.string().c_str(),
                syn.dataset.split(kTrain).size(), syn.dataset.split(kValidation).size(),
                syn.dataset.split(kTest).size(), syn.margin_certificate);
    return 0;
}

struct BenchOptions {
    std::size_t pairs = 100;
    std::size_t min_order = 2;
    std::size_t max_order = 6;
    std::size_t attr_dim = 2;
    double density = 0.5;
};

int cmd_bench(const Globals& g, const BenchOptions& o) {
    const Config c = load_config(g);
    MatcherConfig exact = matcher_config(g, c), ga = exact;
    exact.method = MatchMethod::exact;
    ga.method = MatchMethod::graduated;
    if (o.min_order < 1 || o.min_order > o.max_order) throw ValidationError("need 1 <= min-order <= max-order");
    if (o.max_order > exact.exact_max_order)
        throw ValidationError("max-order exceeds the exact solver cap; raise --exact-max-order");
    std::mt19937_64 rng(seed_of(g, c));
    std::uniform_int_distribution<std::size_t> order(o.min_order, o.max_order);

    using clock = std::chrono::steady_clock;
    double t_exact = 0.0, t_ga = 0.0, gap_sum = 0.0, gap_max = 0.0, gap_min = INFINITY;
    std::size_t attained = 0, negative = 0;
    for (std::size_t p = 0; p < o.pairs; ++p) {
        const auto x = to_representation(random_graph(rng, order(rng), o.attr_dim, o.density, 1.0));
        const auto y = to_representation(random_graph(rng, order(rng), o.attr_dim, o.density, 1.0));
        auto t0 = clock::now();
        const double ve = sdp(x, y, exact).value;
        auto t1 = clock::now();
        const double vg = sdp(x, y, ga).value;
        auto t2 = clock::now();
        t_exact += std::chrono::duration<double>(t1 - t0).count();
        t_ga += std::chrono::duration<double>(t2 - t1).count();
        const double gap = ve - vg;
        if (gap < -1e-9 * std::max(1.0, std::abs(ve))) ++negative;
        if (gap <= 1e-9 * std::max(1.0, std::abs(ve))) ++attained;
        gap_sum += gap;
        gap_max = std::max(gap_max, gap);
        gap_min = std::min(gap_min, gap);
    }
    const double n = static_cast<double>(std::max<std::size_t>(o.pairs, 1));
    const json out = {{"pairs", o.pairs},
                      {"order_range", {o.min_order, o.max_order}},
                      {"attr_dim", o.attr_dim},
                      {"gap", {{"mean", gap_sum / n}, {"max", gap_max}, {"min", o.pairs ? gap_min : 0.0}}},
                      {"negative_gaps", negative},
                      {"attainment_rate", static_cast<double>(attained) / n},
                      {"mean_ms", {{"exact", 1e3 * t_exact / n}, {"graduated", 1e3 * t_ga / n}}}};
    std::cout << out.dump(2) << '\n';
    if (auto dir = out_dir(g); !dir.empty()) write_json_file(out, dir / "bench.json");
    return 0;
}

int cmd_protocol(const Globals& g, const std::string& dataset, const std::string& gxl,
                 const std::optional<std::string>& algorithm, std::optional<int> repeats) {
    const Config c = load_config(g);
    ProtocolConfig pc;
    pc.train = train_config(g, c);
    pc.seed = seed_of(g, c);
    if (c.doc.contains("algorithm")) pc.algorithm = parse_algorithm(c.doc.at("algorithm").get<std::string>());
    if (algorithm) pc.algorithm = parse_algorithm(*algorithm);
    pc.eta_grid = c.doc.value("eta_grid", pc.eta_grid);
    pc.lambda_grid = c.doc.value("lambda_grid", pc.lambda_grid);
    pc.repeats = c.doc.value("repeats", pc.repeats);
    if (repeats) pc.repeats = *repeats;
    pc.k = c.doc.value("k", pc.k);
    const Dataset ds = dataset_from(g, c, dataset, gxl);
    const auto rep = run_protocol(ds, pc);
    std::cout << rep.to_text();
    if (auto dir = out_dir(g); !dir.empty()) {
        auto j = rep.to_json();
        j["provenance"] = ds.provenance;
        write_json_file(j, dir / "report.json");
        std::ofstream(dir / "report.txt") << rep.to_text();
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sublinear classifiers on attributed graphs"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--matcher", g.matcher, "Graph matcher")->check(CLI::IsMember({"exact", "graduated"}));
    app.add_option("--exact-max-order", g.exact_max_order, "Largest order the exact matcher accepts");
    app.add_option("--seed", g.seed, "Random seed");
    app.add_option("--config", g.config, "JSON configuration file");
    app.add_option("--out", g.out, "Output directory");

    std::string dataset, gxl, split = kTrain, model;
    std::string graph_a, graph_b;
    bool as_json = false;
    std::optional<std::string> algorithm;
    std::optional<int> repeats;
    BenchOptions bench;

    auto* dot = app.add_subcommand("dot", "Sublinear dot product of two graph files");
    dot->add_option("a", graph_a, "First graph (.json or .gxl)")->required();
    dot->add_option("b", graph_b, "Second graph (.json or .gxl)")->required();
    dot->add_option("--gxl-config", gxl, "Attribute config for .gxl inputs");

    auto* train = app.add_subcommand("train", "Train a classifier; writes model.json and trace.jsonl");
    train->add_option("--dataset", dataset, "Dataset directory");
    train->add_option("--gxl-config", gxl, "Read --dataset as IAM GXL/CXL with this attribute config");
    train->add_option("--split", split, "Training split");

    auto* eval = app.add_subcommand("eval", "Accuracy and confusion matrix of a model on a split");
    eval->add_option("--model", model, "Model JSON")->required();
    eval->add_option("--dataset", dataset, "Dataset directory");
    eval->add_option("--gxl-config", gxl, "Read --dataset as IAM GXL/CXL with this attribute config");
    eval->add_option("--split", split, "Split to evaluate")->default_str("test");
    eval->add_flag("--json", as_json, "Print JSON instead of a table");

    app.add_subcommand("synth", "Generate a planted-margin synthetic dataset");

    auto* benchcmd = app.add_subcommand("bench", "Exact versus graduated matcher on random pairs");
    benchcmd->add_option("--pairs", bench.pairs, "Number of pairs");
    benchcmd->add_option("--min-order", bench.min_order, "Smallest graph order");
    benchcmd->add_option("--max-order", bench.max_order, "Largest graph order");
    benchcmd->add_option("--attr-dim", bench.attr_dim, "Attribute dimension");
    benchcmd->add_option("--density", bench.density, "Edge probability");

    auto* protocol = app.add_subcommand("protocol", "Grid search, retraining and repeated test evaluation");
    protocol->add_option("--dataset", dataset, "Dataset directory");
    protocol->add_option("--gxl-config", gxl, "Read --dataset as IAM GXL/CXL with this attribute config");
    protocol->add_option("--algorithm", algorithm, "perceptron, margin_perceptron or knn");
    protocol->add_option("--repeats", repeats, "Runs per configuration");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    if (eval->parsed() && eval->count("--split") == 0) split = kTest;

    try {
        if (dot->parsed()) return cmd_dot(g, graph_a, graph_b, gxl);
        if (train->parsed()) return cmd_train(g, dataset, gxl, split);
        if (eval->parsed()) return cmd_eval(g, model, dataset, gxl, split, as_json);
        if (benchcmd->parsed()) return cmd_bench(g, bench);
        if (protocol->parsed()) return cmd_protocol(g, dataset, gxl, algorithm, repeats);
        return cmd_synth(g);
    } catch (const InfeasibleSpecError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
