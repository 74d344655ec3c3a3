#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>

#include "qsbps/qsbps.hpp"
#include "qsbps/service.hpp"

namespace fs = std::filesystem;
using namespace qsbps;

namespace {

std::size_t resolve_jobs(std::size_t jobs) { return jobs == 0 ? default_jobs() : jobs; }

enum ExitCode { ok = 0, usage = 2, input_data = 3, internal = 4 };

struct SelectionOpts {
    double gamma = 0.0;
    double beta = 0.0;
    std::string noise = "none";

    void add(CLI::App* app) {
        app->add_option("--gamma", gamma, "weight of the trained question reward")->capture_default_str();
        app->add_option("--beta", beta, "weight of the answer error rate (noisy modes)")->capture_default_str();
        app->add_option("--noise", noise, "error model: none | fixed:<eps> | tf")->capture_default_str();
    }
    [[nodiscard]] SelectionParams params() const {
        SelectionParams p{gamma, beta};
        p.validate();
        return p;
    }
    [[nodiscard]] ErrorModel error_model() const { return parse_error_model(noise); }
};

struct ModelOpts {
    std::string model;
    std::string corpus;  // overrides the path stored in the model

    void add(CLI::App* app) {
        app->add_option("--model", model, "trained model file")->required();
        app->add_option("--corpus", corpus, "corpus file (default: the one recorded in the model)");
    }
};

std::string echo_path;

void add_echo(CLI::App* app) {
    app->add_option("--echo-config", echo_path, "write the effective configuration to this file");
}

/// Writes the parsed configuration so the run can be repeated with --config.
void write_echo(const CLI::App& root, const std::string& fallback) {
    const auto& path = echo_path.empty() ? fallback : echo_path;
    if (path.empty()) {
        return;
    }
    std::ofstream out(path);
    if (!out) {
        throw input_error("cannot write config echo '" + path + "'");
    }
    for (const auto* sub : root.get_subcommands()) {
        out << '[' << sub->get_name() << "]\n" << sub->config_to_str(true, false);
    }
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw input_error("cannot write '" + path + "'");
    }
    return out;
}

/// Runs `fn` with a stream for `path`, or stdout when the path is empty or "-".
template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
    if (path.empty() || path == "-") {
        fn(std::cout);
        std::cout.flush();
        return;
    }
    auto out = open_out(path);
    fn(out);
}

std::string resolve_corpus(const ModelOpts& m, const ModelFile& file) {
    if (!m.corpus.empty()) {
        return m.corpus;
    }
    if (file.corpus_path.empty()) {
        throw input_error("model records no corpus path; pass --corpus");
    }
    fs::path p(file.corpus_path);
    if (p.is_relative() && !fs::exists(p)) {
        auto beside = fs::path(m.model).parent_path() / p;
        if (fs::exists(beside)) {
            return beside.string();
        }
    }
    return p.string();
}

std::shared_ptr<Workspace> load_workspace(const ModelOpts& m) {
    auto file = load_model(m.model);
    auto corpus = load_corpus(resolve_corpus(m, file), file.field_mode);
    return std::make_shared<Workspace>(workspace_for_model(corpus, file));
}

std::size_t topic_position(const Workspace& ws, const std::string& topic) {
    auto pos = ws.find(topic);
    if (!pos) {
        throw input_error("unknown or unsplittable topic '" + topic + "'");
    }
    return *pos;
}

// ---------------------------------------------------------------- ingest

struct IngestOpts {
    std::string raw;
    std::string dictionary;
    std::string corpus;
    std::string field_mode = "metadata+reviews";
    std::string out;
};

int run_ingest(const CLI::App& root, const IngestOpts& o) {
    const auto mode = parse_field_mode(o.field_mode);
    std::optional<Corpus> corpus;
    if (!o.raw.empty()) {
        if (o.dictionary.empty()) {
            throw usage_error("--raw requires --dictionary");
        }
        std::ifstream dict(o.dictionary);
        if (!dict) {
            throw input_error("cannot open dictionary '" + o.dictionary + "'");
        }
        std::ifstream raw(o.raw);
        if (!raw) {
            throw input_error("cannot open raw corpus '" + o.raw + "'");
        }
        auto tok = DictionaryTokenizer::from_stream(dict);
        corpus = Corpus::from_records(annotate_raw_corpus(raw, tok), mode);
    } else if (!o.corpus.empty()) {
        corpus = load_corpus(o.corpus, mode);
    } else {
        throw usage_error("ingest needs --raw (with --dictionary) or --corpus");
    }
    if (!o.out.empty()) {
        auto out = open_out(o.out);
        write_corpus(out, *corpus);
        write_echo(root, o.out + ".config.toml");
    }
    auto indexes = build_all_topic_indexes(*corpus, mode);
    std::size_t pooled = 0;
    for (const auto& idx : indexes) {
        pooled += idx.pool_size();
    }
    std::cerr << "products " << corpus->products().size() << ", topics " << corpus->topics().size()
              << ", entities " << corpus->vocabulary().size() << ", pooled entity slots " << pooled << " ("
              << to_string(mode) << ")\n";
    return ok;
}

// ---------------------------------------------------------- gen-synthetic

struct GenOpts {
    SyntheticSpec spec;
    std::string out;
};

int run_gen(const CLI::App& root, const GenOpts& o) {
    auto records = generate_synthetic_records(o.spec);
    auto corpus = Corpus::from_records(records, FieldMode::MetadataAndReviews);
    with_output(o.out, [&](std::ostream& out) { write_corpus(out, corpus); });
    write_echo(root, o.out.empty() || o.out == "-" ? "" : o.out + ".config.toml");
    return ok;
}

// ------------------------------------------------------------------ train

struct TrainOpts {
    std::string corpus;
    std::string field_mode = "metadata+reviews";
    std::vector<double> split{0.6, 0.1, 0.3};
    std::uint64_t split_seed = 42;
    std::string mode = "duet";
    std::uint64_t seed = 42;
    std::size_t jobs = 0;  // 0 = all cores
    std::string out;
};

int run_train(const CLI::App& root, const TrainOpts& o) {
    ModelFile file;
    file.field_mode = parse_field_mode(o.field_mode);
    file.mode = parse_training_mode(o.mode);
    file.seed = o.seed;
    file.corpus_path = o.corpus;
    file.split_ratios = {o.split[0], o.split[1], o.split[2]};
    file.split_ratios.validate();
    file.split_seed = o.split_seed;

    auto corpus = load_corpus(o.corpus, file.field_mode);
    auto ws = prepare_workspace(corpus, file.field_mode, file.split_ratios, file.split_seed);
    if (ws.size() == 0) {
        throw input_error("no topic has enough purchases to split");
    }
    for (const auto& t : ws.skipped) {
        std::cerr << "skipping topic '" << t << "': too few purchases to split\n";
    }
    file.topics = train_all(ws.indexes, ws.splits, file.mode, file.seed, resolve_jobs(o.jobs));
    save_model(file, o.out);
    write_echo(root, o.out + ".config.toml");
    std::cerr << "trained " << file.topics.size() << " topics (" << to_string(file.mode) << ", seed " << o.seed
              << ") -> " << o.out << '\n';
    return ok;
}

// --------------------------------------------------------------- simulate

struct SimulateOpts {
    ModelOpts model;
    SelectionOpts sel;
    std::string topic;
    std::string target;
    std::size_t nq = 10;
    std::uint64_t seed = 42;
    std::string out;
};

int run_simulate(const CLI::App& root, const SimulateOpts& o) {
    auto ws = load_workspace(o.model);
    const auto t = topic_position(*ws, o.topic);
    const auto& index = ws->indexes[t];
    auto target = index.product_position(o.target);
    if (!target) {
        throw input_error("product '" + o.target + "' is not in topic '" + o.topic + "'");
    }
    SessionOptions options{o.sel.params(), o.sel.error_model(), o.nq, QuestionPolicy::Qsbps, o.seed};
    const Oracle oracle =
        options.error_model.noisy() ? Oracle::noisy(options.error_model, o.seed) : Oracle::perfect();
    auto trace = run_session(ws->models[t], index, *target, options, oracle, 0, true);
    with_output(o.out, [&](std::ostream& out) { out << to_json(trace, index).dump(2) << '\n'; });
    write_echo(root, o.out.empty() || o.out == "-" ? "" : o.out + ".config.toml");
    return ok;
}

// --------------------------------------------------------------- evaluate

struct EvalOpts {
    ModelOpts model;
    SelectionOpts sel;
    std::vector<std::size_t> nq{5, 10, 15, 20};
    std::size_t trials = 1;
    std::uint64_t seed = 42;
    std::size_t jobs = 0;  // 0 = all cores
    std::string part = "test";
    std::string baseline;
    std::string out;
};

SplitPart parse_part(const std::string& s) {
    if (s == "test") return SplitPart::Test;
    if (s == "validation") return SplitPart::Validation;
    if (s == "train") return SplitPart::Train;
    throw usage_error("unknown split part '" + s + "' (expected train | validation | test)");
}

int run_evaluate(const CLI::App& root, const EvalOpts& o) {
    EvalConfig cfg;
    cfg.n_q = o.nq;
    cfg.params = o.sel.params();
    cfg.error_model = o.sel.error_model();
    cfg.trials = o.trials;
    cfg.seed = o.seed;
    cfg.part = parse_part(o.part);
    cfg.jobs = resolve_jobs(o.jobs);
    if (!o.baseline.empty() && o.baseline != "random") {
        throw usage_error("unknown baseline '" + o.baseline + "' (expected random)");
    }
    auto ws = load_workspace(o.model);
    auto reports = evaluate(*ws, cfg);
    if (o.baseline == "random") {
        auto rnd = random_baseline(*ws, cfg);
        reports.insert(reports.end(), rnd.begin(), rnd.end());
    }
    with_output(o.out, [&](std::ostream& out) { write_metrics_csv(out, reports); });
    write_echo(root, o.out.empty() || o.out == "-" ? "" : o.out + ".config.toml");
    return ok;
}

// ------------------------------------------------------------------ sweep

struct SweepOpts {
    ModelOpts model;
    std::string noise = "none";
    std::vector<std::size_t> nq{5, 10, 15, 20, 25, 30};
    std::vector<double> gammas{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    std::vector<double> betas{0.0};
    std::size_t trials = 1;
    std::uint64_t seed = 42;
    std::size_t jobs = 0;  // 0 = all cores
    std::string out_dir = ".";
};

int run_sweep(const CLI::App& root, const SweepOpts& o) {
    EvalConfig base;
    base.error_model = parse_error_model(o.noise);
    base.trials = o.trials;
    base.seed = o.seed;
    base.jobs = resolve_jobs(o.jobs);
    SweepAxes axes{o.nq, o.gammas, o.betas};
    auto ws = load_workspace(o.model);
    auto result = sweep(*ws, axes, base);
    fs::create_directories(o.out_dir);
    const fs::path dir(o.out_dir);
    {
        auto out = open_out((dir / "sweep.csv").string());
        write_metrics_csv(out, result.cells);
    }
    {
        auto out = open_out((dir / "best.csv").string());
        write_best_csv(out, result);
    }
    {
        auto out = open_out((dir / "heatmap.csv").string());
        write_heatmap(out, result);
    }
    write_echo(root, (dir / "config.toml").string());
    for (const auto& b : result.best) {
        std::cerr << "n_q " << b.n_q << ": gamma " << b.gamma << ", beta " << b.beta << ", mrr " << b.mrr << '\n';
    }
    return ok;
}

// ------------------------------------------------------------------ serve

struct ServeOpts {
    ModelOpts model;
    SelectionOpts sel;
    std::size_t nq_limit = 10;
    std::string host = "127.0.0.1";
    int port = 8080;
    double ttl_minutes = 30;
};

int run_serve(const CLI::App& root, const ServeOpts& o) {
    ServiceDefaults defaults{o.sel.params(), o.sel.error_model(), o.nq_limit};
    auto ws = load_workspace(o.model);
    const auto ttl = std::chrono::milliseconds(static_cast<std::int64_t>(o.ttl_minutes * 60'000));
    SessionService service(ws, defaults, ttl);
    httplib::Server server;
    bind_routes(server, service);
    write_echo(root, "");
    int port = o.port;
    if (port == 0) {
        port = server.bind_to_any_port(o.host);
        if (port < 0) {
            throw input_error("cannot bind " + o.host);
        }
        std::cout << "listening on http://" << o.host << ':' << port << std::endl;
        server.listen_after_bind();
        return ok;
    }
    if (!server.bind_to_port(o.host, port)) {
        throw input_error("cannot bind " + o.host + ":" + std::to_string(port));
    }
    std::cout << "listening on http://" << o.host << ':' << port << std::endl;
    server.listen_after_bind();
    return ok;
}

// ---------------------------------------------------------------- session

struct SessionOpts {
    ModelOpts model;
    SelectionOpts sel;
    std::string topic;
    std::size_t nq = 10;
    std::size_t top = 5;
    std::string transcript;
};

int run_session_cli(const CLI::App& root, const SessionOpts& o) {
    auto ws = load_workspace(o.model);
    const auto t = topic_position(*ws, o.topic);
    const auto& index = ws->indexes[t];
    Session session(ws->models[t], index, {o.sel.params(), o.sel.error_model(), o.nq});
    write_echo(root, "");

    std::string line;
    while (auto q = session.current_question()) {
        std::cout << "Q" << session.question_count() + 1 << ": "
                  << SessionService::prompt(index.entity_labels[*q]) << " [y/n/s] " << std::flush;
        if (!std::getline(std::cin, line)) {
            std::cout << '\n';
            break;
        }
        auto a = parse_answer(line);
        if (!a) {
            std::cout << "please answer y, n or s\n";
            continue;
        }
        session.submit_answer(*a);
        if (session.history().back().contradiction) {
            std::cout << "(that answer contradicts all remaining candidates)\n";
        }
    }
    const auto top = session.final_ranking(o.top);
    if (session.prunes() && session.candidates().count() == 1) {
        std::cout << "Found: " << index.product_ids[session.candidates().first()] << '\n';
    }
    std::cout << "Top " << top.size() << ":\n";
    for (std::size_t i = 0; i < top.size(); ++i) {
        std::cout << "  " << i + 1 << ". " << index.product_ids[top[i].product] << "  " << top[i].score << '\n';
    }
    if (!o.transcript.empty()) {
        auto out = open_out(o.transcript);
        out << session.transcript().dump(2) << '\n';
    }
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Interactive product search by entity questions"};
    app.set_config("--config", "", "read options from a TOML file written by --echo-config");
    app.require_subcommand(1);

    IngestOpts ingest;
    auto* c_ingest = app.add_subcommand("ingest", "annotate raw text or validate an annotated corpus");
    c_ingest->add_option("--raw", ingest.raw, "raw JSONL with description text and reviews");
    c_ingest->add_option("--dictionary", ingest.dictionary, "entity dictionary, one entry per line");
    c_ingest->add_option("--corpus", ingest.corpus, "annotated corpus to validate");
    c_ingest->add_option("--field-mode", ingest.field_mode, "metadata | metadata+reviews")->capture_default_str();
    c_ingest->add_option("--out", ingest.out, "write the annotated corpus here");
    add_echo(c_ingest);

    GenOpts gen;
    auto* c_gen = app.add_subcommand("gen-synthetic", "write a synthetic binary-code corpus");
    c_gen->add_option("--n-topics", gen.spec.n_topics)->capture_default_str();
    c_gen->add_option("--n-products", gen.spec.n_products)->capture_default_str();
    c_gen->add_option("--n-bit-entities", gen.spec.n_bit_entities)->capture_default_str();
    c_gen->add_option("--n-distractors", gen.spec.n_distractors)->capture_default_str();
    c_gen->add_option("--distractor-density", gen.spec.distractor_density)->capture_default_str();
    c_gen->add_option("--n-review-entities", gen.spec.n_review_entities)->capture_default_str();
    c_gen->add_option("--review-density", gen.spec.review_density)->capture_default_str();
    c_gen->add_option("--max-mentions", gen.spec.max_mentions)->capture_default_str();
    c_gen->add_option("--purchase-skew", gen.spec.purchase_skew, "Zipf exponent; 0 = one purchase each")
        ->capture_default_str();
    c_gen->add_option("--n-purchases", gen.spec.n_purchases)->capture_default_str();
    c_gen->add_option("--n-trend-entities", gen.spec.n_trend_entities)->capture_default_str();
    c_gen->add_option("--trend-share", gen.spec.trend_share)->capture_default_str();
    c_gen->add_option("--seed", gen.spec.seed)->capture_default_str();
    c_gen->add_option("--out", gen.out, "output corpus (default stdout)");
    add_echo(c_gen);

    TrainOpts train;
    auto* c_train = app.add_subcommand("train", "offline duet training");
    c_train->add_option("--corpus", train.corpus)->required();
    c_train->add_option("--field-mode", train.field_mode, "metadata | metadata+reviews")->capture_default_str();
    c_train->add_option("--split", train.split, "train,validation,test ratios")
        ->delimiter(',')
        ->expected(3)
        ->capture_default_str();
    c_train->add_option("--split-seed", train.split_seed)->capture_default_str();
    c_train->add_option("--mode", train.mode, "duet | q-train | p-train | none")->capture_default_str();
    c_train->add_option("--seed", train.seed, "purchase order seed")->capture_default_str();
    c_train->add_option("--jobs", train.jobs, "worker threads, 0 = all cores")->capture_default_str();
    c_train->add_option("--out", train.out)->required();
    add_echo(c_train);

    SimulateOpts sim;
    auto* c_sim = app.add_subcommand("simulate", "one session against a simulated user");
    sim.model.add(c_sim);
    sim.sel.add(c_sim);
    c_sim->add_option("--topic", sim.topic)->required();
    c_sim->add_option("--target", sim.target, "product the simulated user wants")->required();
    c_sim->add_option("--nq", sim.nq, "question budget")->capture_default_str();
    c_sim->add_option("--seed", sim.seed, "noisy oracle seed")->capture_default_str();
    c_sim->add_option("--out", sim.out, "transcript JSON (default stdout)");
    add_echo(c_sim);

    EvalOpts ev;
    auto* c_eval = app.add_subcommand("evaluate", "simulate held-out purchases and report metrics");
    ev.model.add(c_eval);
    ev.sel.add(c_eval);
    c_eval->add_option("--nq", ev.nq, "question budgets")->delimiter(',')->capture_default_str();
    c_eval->add_option("--trials", ev.trials, "sessions per held-out purchase")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    c_eval->add_option("--seed", ev.seed)->capture_default_str();
    c_eval->add_option("--jobs", ev.jobs, "worker threads, 0 = all cores")->capture_default_str();
    c_eval->add_option("--part", ev.part, "test | validation | train")->capture_default_str();
    c_eval->add_option("--baseline", ev.baseline, "also report the random-question baseline (random)");
    c_eval->add_option("--out", ev.out, "metrics CSV (default stdout)");
    add_echo(c_eval);

    SweepOpts sw;
    auto* c_sweep = app.add_subcommand("sweep", "grid over gamma, beta and N_q on the validation split");
    sw.model.add(c_sweep);
    c_sweep->add_option("--noise", sw.noise)->capture_default_str();
    c_sweep->add_option("--nq", sw.nq)->delimiter(',')->capture_default_str();
    c_sweep->add_option("--gammas", sw.gammas)->delimiter(',')->capture_default_str();
    c_sweep->add_option("--betas", sw.betas)->delimiter(',')->capture_default_str();
    c_sweep->add_option("--trials", sw.trials)->check(CLI::PositiveNumber)->capture_default_str();
    c_sweep->add_option("--seed", sw.seed)->capture_default_str();
    c_sweep->add_option("--jobs", sw.jobs, "worker threads, 0 = all cores")->capture_default_str();
    c_sweep->add_option("--out-dir", sw.out_dir)->capture_default_str();
    add_echo(c_sweep);

    ServeOpts srv;
    auto* c_serve = app.add_subcommand("serve", "HTTP session API");
    srv.model.add(c_serve);
    srv.sel.add(c_serve);
    c_serve->add_option("--nq-limit", srv.nq_limit, "default question budget")->capture_default_str();
    c_serve->add_option("--host", srv.host)->capture_default_str();
    c_serve->add_option("--port", srv.port, "0 picks a free port")->capture_default_str();
    c_serve->add_option("--ttl", srv.ttl_minutes, "idle session lifetime in minutes")->capture_default_str();
    add_echo(c_serve);

    SessionOpts ses;
    auto* c_session = app.add_subcommand("session", "interactive search in the terminal");
    ses.model.add(c_session);
    ses.sel.add(c_session);
    c_session->add_option("--topic", ses.topic)->required();
    c_session->add_option("--nq", ses.nq, "question budget")->capture_default_str();
    c_session->add_option("--top", ses.top, "products to print at the end")->capture_default_str();
    c_session->add_option("--transcript", ses.transcript, "write the session transcript here");
    add_echo(c_session);

    for (auto* sub : app.get_subcommands([](const CLI::App*) { return true; })) {
        sub->configurable();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : usage;
    }

    try {
        if (*c_ingest) return run_ingest(app, ingest);
        if (*c_gen) return run_gen(app, gen);
        if (*c_train) return run_train(app, train);
        if (*c_sim) return run_simulate(app, sim);
        if (*c_eval) return run_evaluate(app, ev);
        if (*c_sweep) return run_sweep(app, sw);
        if (*c_serve) return run_serve(app, srv);
        if (*c_session) return run_session_cli(app, ses);
    } catch (const usage_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return usage;
    } catch (const input_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return input_data;
    } catch (const std::logic_error& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return internal;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return internal;
    }
    return usage;
}
