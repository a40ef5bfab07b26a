#include "cooc/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "cooc/baselines.hpp"
#include "cooc/eval.hpp"
#include "cooc/ingest.hpp"
#include "cooc/io.hpp"
#include "cooc/kernels.hpp"
#include "cooc/training.hpp"

namespace cooc::cli {

namespace {

std::vector<std::size_t> parse_size_list_with(const std::string& text, char sep, const char* what)
{
    std::vector<std::size_t> out;
    if (text.empty())
        return out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, sep)) {
        std::size_t used = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(part, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != part.size() || v == 0 || part.front() == '-')
            throw std::invalid_argument(std::string("invalid ") + what + " '" + text + "'");
        out.push_back(static_cast<std::size_t>(v));
    }
    if (text.back() == sep)
        throw std::invalid_argument(std::string("invalid ") + what + " '" + text + "'");
    return out;
}

}  // namespace

std::vector<std::size_t> parse_layer_spec(const std::string& spec)
{
    return parse_size_list_with(spec, 'x', "layer spec");
}

std::vector<std::size_t> parse_size_list(const std::string& list)
{
    return parse_size_list_with(list, ',', "list");
}

namespace {

// Raised for invalid data (as opposed to invalid usage).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Values shared by train / evaluate.
struct HyperFlags {
    std::string model = "dem";
    std::string layers = "32";
    Hyperparams hyper;
    bool untied = false;
    bool no_lbl_bias = false;

    void add_to(CLI::App& cmd)
    {
        cmd.add_option("--layers", layers, "DEM hidden widths, e.g. 32x16; empty for none")->capture_default_str();
        cmd.add_option("--lr", hyper.learning_rate, "learning rate")->capture_default_str();
        cmd.add_option("--lr-decay", hyper.lr_decay, "learning-rate multiplier per epoch")->capture_default_str();
        cmd.add_option("--negatives", hyper.negatives, "negative samples per record")->capture_default_str();
        cmd.add_option("--epochs", hyper.epochs, "training epochs")->capture_default_str();
        cmd.add_option("--init-scale", hyper.init_scale, "initialisation scale")->capture_default_str();
        cmd.add_option("--weight-decay", hyper.weight_decay, "multiplicative weight decay")->capture_default_str();
        cmd.add_option("--dim", hyper.embedding_dim, "LBL embedding width")->capture_default_str();
        cmd.add_flag("--untied", untied, "FVBM: asymmetric pair weights");
        cmd.add_flag("--no-lbl-bias", no_lbl_bias, "LBL: drop the per-item bias");
        cmd.add_flag("--reweight-negatives", hyper.reweight_negatives, "scale negative terms by (N - |v|) / T");
    }

    TrainConfig config(std::uint64_t seed, const std::string& kind) const
    {
        TrainConfig c;
        c.kind = parse_model_kind(kind);
        c.hyper = hyper;
        c.hyper.seed = seed;
        c.hyper.layer_sizes = parse_layer_spec(layers);
        c.hyper.fvbm_tied = !untied;
        c.hyper.lbl_bias = !no_lbl_bias;
        validate(c.hyper);
        return c;
    }
};

struct BaselineFlags {
    std::string norm = "cosine";
    std::size_t steps = 2;
    bool final_step = false;

    void add_to(CLI::App& cmd)
    {
        cmd.add_option("--norm", norm, "NormCVG normalisation: cosine, target or source")->capture_default_str();
        cmd.add_option("--steps", steps, "LRW walk length")->capture_default_str();
        cmd.add_flag("--final-step-only", final_step, "LRW: score only the last step");
    }

    BaselineConfig config(const std::string& kind) const
    {
        BaselineConfig c;
        c.kind = parse_baseline_kind(kind);
        c.norm = parse_covisit_norm(norm);
        c.lrw_steps = steps;
        c.lrw_aggregate = final_step ? WalkAggregate::FinalStep : WalkAggregate::Cumulative;
        return c;
    }
};

bool is_model_name(const std::string& s)
{
    return s == "dem" || s == "fvbm" || s == "l1" || s == "lbl";
}

// Injects key=value pairs from --config for options missing on the command line.
std::vector<std::string> apply_config_file(std::vector<std::string> args)
{
    auto it = std::find_if(args.begin(), args.end(),
                           [](const std::string& a) { return a == "--config" || a.starts_with("--config="); });
    if (it == args.end())
        return args;
    std::string path;
    if (it->starts_with("--config=")) {
        path = it->substr(9);
        args.erase(it);
    } else {
        if (it + 1 == args.end())
            throw CLI::ArgumentMismatch("--config requires a file path");
        path = *(it + 1);
        args.erase(it, it + 2);
    }
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot read config file " + path);
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            continue;
        auto trim = [](std::string s) {
            s.erase(0, s.find_first_not_of(" \t\r"));
            s.erase(s.find_last_not_of(" \t\r") + 1);
            return s;
        };
        std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            continue;
        if (!key.starts_with("--"))
            key = "--" + key;
        const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
            return a == key || a.starts_with(key + "=");
        });
        if (!given)
            args.push_back(key + "=" + value);
    }
    return args;
}

void print_report(std::ostream& out, const EvalReport& report)
{
    write_report_rows(out, report);
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Energy-based co-occurrence models: ingest, train, evaluate, predict"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "worker thread cap (0 = OpenMP default)");
    std::string config_path;
    app.add_option("--config", config_path, "key=value file; command-line flags win");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "parse a dataset into a corpus file");
    std::string format, input, output;
    std::optional<double> threshold;
    std::string edges = "out";
    std::size_t top_items = 0;
    ingest->add_option("--format", format, "edges, transactions, movielens or jester")
        ->required()
        ->check(CLI::IsMember({"edges", "transactions", "movielens", "jester"}));
    ingest->add_option("input", input, "input dataset file")->required();
    ingest->add_option("output", output, "corpus file to write")->required();
    ingest->add_option("--threshold", threshold, "binarisation threshold (movielens 4, jester 0)");
    ingest->add_option("--edges", edges, "edge-list records: out, in or both")
        ->check(CLI::IsMember({"out", "in", "both"}))
        ->capture_default_str();
    ingest->add_option("--top-items", top_items, "keep only the M most frequent items");

    // train
    auto* trainc = app.add_subcommand("train", "train a model on a corpus file");
    HyperFlags train_flags;
    std::string corpus_path, checkpoint, trace_path;
    std::uint64_t seed = 1;
    trainc->add_option("corpus", corpus_path, "corpus file")->required();
    trainc->add_option("--model", train_flags.model, "dem, fvbm, l1 or lbl")
        ->check(CLI::IsMember({"dem", "fvbm", "l1", "lbl"}))
        ->capture_default_str();
    trainc->add_option("-o,--output", checkpoint, "checkpoint file to write")->required();
    trainc->add_option("--trace", trace_path, "training trace TSV (default <checkpoint>.trace.tsv)");
    trainc->add_option("--seed", seed, "random seed")->capture_default_str();
    train_flags.add_to(*trainc);

    // evaluate
    auto* evalc = app.add_subcommand("evaluate", "cross-validated Top@K evaluation");
    HyperFlags eval_flags;
    BaselineFlags baseline_flags;
    std::string eval_corpus, baseline, k_list = "1,10", report_path, summary_path;
    std::string eval_model;
    std::vector<std::string> compare;
    std::size_t folds = 5;
    std::uint64_t eval_seed = 1;
    evalc->add_option("corpus", eval_corpus, "corpus file")->required();
    auto* model_opt = evalc->add_option("--model", eval_model, "dem, fvbm, l1 or lbl")
                          ->check(CLI::IsMember({"dem", "fvbm", "l1", "lbl"}));
    auto* baseline_opt = evalc->add_option("--baseline", baseline, "cvg, normcvg, lrw or popularity")
                             ->check(CLI::IsMember({"cvg", "normcvg", "lrw", "popularity"}));
    auto* compare_opt = evalc->add_option("--compare", compare, "two checkpoints or method names")->expected(2);
    model_opt->excludes(baseline_opt)->excludes(compare_opt);
    baseline_opt->excludes(compare_opt);
    evalc->add_option("--k", k_list, "comma-separated K values")->capture_default_str();
    evalc->add_option("--folds", folds, "number of folds")->capture_default_str();
    evalc->add_option("--seed", eval_seed, "random seed")->capture_default_str();
    evalc->add_option("--output", report_path, "also write the TSV report here");
    evalc->add_option("--summary", summary_path, "write a JSON summary here");
    eval_flags.add_to(*evalc);
    baseline_flags.add_to(*evalc);

    // predict
    auto* predictc = app.add_subcommand("predict", "rank missing items for a context");
    std::string predict_ckpt, items_text, vocab_path;
    std::size_t predict_k = 10;
    predictc->add_option("checkpoint", predict_ckpt, "checkpoint file")->required();
    predictc->add_option("--items", items_text, "comma-separated context item ids");
    predictc->add_option("--k", predict_k, "number of candidates to print")->capture_default_str();
    predictc->add_option("--vocab", vocab_path, "vocabulary sidecar for token names");

    // export-embeddings
    auto* exportc = app.add_subcommand("export-embeddings", "write concatenated readout embeddings");
    std::string export_ckpt, export_out, export_vocab;
    exportc->add_option("checkpoint", export_ckpt, "DEM checkpoint")->required();
    exportc->add_option("-o,--output", export_out, "TSV file to write")->required();
    exportc->add_option("--vocab", export_vocab, "vocabulary sidecar for token names");

    // grad-check
    auto* gradc = app.add_subcommand("grad-check", "finite-difference check of the DEM gradients");
    std::string grad_layers = "8x4";
    std::size_t grad_items = 20, grad_negatives = 5;
    std::uint64_t grad_seed = 1;
    double epsilon = 1e-5, tolerance = 1e-4;
    bool corrupt = false;
    gradc->add_option("--layers", grad_layers, "hidden widths")->capture_default_str();
    gradc->add_option("--items", grad_items, "number of items")->capture_default_str();
    gradc->add_option("--negatives", grad_negatives, "negative samples")->capture_default_str();
    gradc->add_option("--seed", grad_seed, "random seed")->capture_default_str();
    gradc->add_option("--epsilon", epsilon, "finite-difference step")->capture_default_str();
    gradc->add_option("--tolerance", tolerance, "maximum relative error")->capture_default_str();
    gradc->add_flag("--corrupt-gradient", corrupt, "debug: drop the propagated backprop term");

    try {
        std::vector<std::string> args = apply_config_file(raw_args);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsageError;
    } catch (const DataError& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    }

    kernels::set_num_threads(threads);

    try {
        if (*ingest) {
            std::ifstream in(input);
            if (!in)
                throw DataError("cannot open " + input);
            Corpus corpus;
            if (format == "edges")
                corpus = read_edge_list(in, parse_edge_direction(edges));
            else if (format == "transactions")
                corpus = read_transactions(in);
            else if (format == "movielens")
                corpus = read_movielens(in, threshold.value_or(4.0));
            else
                corpus = read_jester(in, threshold.value_or(0.0));
            if (top_items > 0)
                corpus = keep_top_items(corpus, top_items);
            save_corpus(output, corpus);
            out << "items\t" << corpus.n_items << "\nrecords\t" << corpus.records.size() << "\nentries\t"
                << corpus.n_entries() << '\n';
            return kOk;
        }

        if (*trainc) {
            const Corpus corpus = load_corpus(corpus_path);
            TrainConfig config = train_flags.config(seed, train_flags.model);
            config.on_epoch = [&](std::size_t epoch, double loss) {
                char buf[64];
                std::snprintf(buf, sizeof buf, "epoch %zu\tloss %.6f\n", epoch + 1, loss);
                out << buf << std::flush;
            };
            const TrainResult result = train(corpus, config);
            save_checkpoint(checkpoint, result.model);
            const std::string tp = trace_path.empty() ? checkpoint + ".trace.tsv" : trace_path;
            std::ofstream tout(tp);
            if (!tout)
                throw std::runtime_error("cannot write " + tp);
            write_trace(tout, result.trace);
            return kOk;
        }

        if (*evalc) {
            const Corpus corpus = load_corpus(eval_corpus);
            const auto ks = parse_size_list(k_list);
            if (ks.empty())
                throw std::invalid_argument("--k needs at least one value");

            auto run_method = [&](const std::string& which) -> EvalReport {
                if (std::filesystem::is_regular_file(which)) {
                    const ModelScorer scorer(load_checkpoint(which));
                    return evaluate_fixed(corpus, scorer, which, ks, folds, eval_seed);
                }
                MethodConfig method;
                method.label = which;
                if (is_model_name(which))
                    method.method = eval_flags.config(eval_seed, which);
                else
                    method.method = baseline_flags.config(which);
                return cross_validate(corpus, method, ks, folds, eval_seed);
            };

            std::vector<EvalReport> reports;
            if (!compare.empty()) {
                reports.push_back(run_method(compare[0]));
                reports.push_back(run_method(compare[1]));
            } else if (!baseline.empty()) {
                reports.push_back(run_method(baseline));
            } else {
                reports.push_back(run_method(eval_model.empty() ? "dem" : eval_model));
            }

            std::ostringstream table;
            write_report_header(table);
            for (const auto& r : reports)
                print_report(table, r);
            out << table.str();
            if (reports.size() == 2) {
                for (std::size_t k : ks) {
                    const auto a = hits_at(reports[0].ranks, k);
                    const auto b = hits_at(reports[1].ranks, k);
                    char buf[64];
                    std::snprintf(buf, sizeof buf, "%.6g", mcnemar_significance(a, b));
                    out << "mcnemar\tK=" << k << '\t' << reports[0].label << '\t' << reports[1].label << "\tp=" << buf
                        << '\n';
                }
            }
            if (!report_path.empty()) {
                std::ofstream rf(report_path);
                if (!rf)
                    throw std::runtime_error("cannot write " + report_path);
                rf << table.str();
            }
            if (!summary_path.empty()) {
                std::ofstream sf(summary_path);
                if (!sf)
                    throw std::runtime_error("cannot write " + summary_path);
                sf << report_summary_json(reports) << '\n';
            }
            return kOk;
        }

        if (*predictc) {
            const ModelScorer scorer(load_checkpoint(predict_ckpt));
            const std::size_t n = scorer.n_items();
            std::vector<ItemId> ids;
            if (!items_text.empty()) {
                std::stringstream ss(items_text);
                std::string part;
                while (std::getline(ss, part, ',')) {
                    unsigned long long v = 0;
                    std::size_t used = 0;
                    try {
                        v = std::stoull(part, &used);
                    } catch (const std::exception&) {
                        used = 0;
                    }
                    if (used == 0 || used != part.size() || part.front() == '-')
                        throw std::invalid_argument("invalid item id '" + part + "'");
                    if (v >= n)
                        throw DataError("unknown item id " + part + "; valid ids are 0.." + std::to_string(n - 1));
                    ids.push_back(static_cast<ItemId>(v));
                }
            }
            const ItemSet context = make_itemset(ids, n);
            std::optional<Vocabulary> vocab;
            if (!vocab_path.empty()) {
                std::ifstream vin(vocab_path);
                if (!vin)
                    throw DataError("cannot open " + vocab_path);
                vocab = read_vocabulary(vin);
            }
            const RankedList list = rank_candidates(scorer, context, predict_k);
            out << "rank\titem\ttoken\tprobability\n";
            for (std::size_t r = 0; r < list.items.size(); ++r) {
                const ItemId t = list.items[r];
                const std::string token =
                    vocab && t < vocab->size() ? vocab->token(t) : std::to_string(t);
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.6f", sigmoid(list.scores[r]));
                out << r + 1 << '\t' << t << '\t' << token << '\t' << buf << '\n';
            }
            return kOk;
        }

        if (*exportc) {
            const Model model = load_checkpoint(export_ckpt);
            const auto* dem = std::get_if<DemParams>(&model);
            if (!dem)
                throw DataError("export-embeddings needs a DEM checkpoint");
            if (dem->layers.empty())
                throw DataError("model has no hidden layers, nothing to export");
            std::optional<Vocabulary> vocab;
            if (!export_vocab.empty()) {
                std::ifstream vin(export_vocab);
                if (!vin)
                    throw DataError("cannot open " + export_vocab);
                vocab = read_vocabulary(vin);
            }
            std::ofstream eout(export_out);
            if (!eout)
                throw std::runtime_error("cannot write " + export_out);
            write_embeddings(eout, *dem, vocab ? &*vocab : nullptr);
            std::size_t width = 0;
            for (std::size_t h : dem->layer_sizes())
                width += h;
            out << "items\t" << dem->n_items() << "\ndimensions\t" << width << '\n';
            return kOk;
        }

        if (*gradc) {
            const auto layers = parse_layer_spec(grad_layers);
            const GradientInstance inst = make_gradient_instance(grad_items, layers, grad_negatives, grad_seed);
            const double worst = gradient_check(inst.params, inst.record, inst.negatives, epsilon, corrupt);
            const bool pass = worst <= tolerance;
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.3e", worst);
            out << (pass ? "PASS" : "FAIL") << "\tmax_relative_error\t" << buf << '\n';
            return pass ? kOk : kCheckFailed;
        }
    } catch (const DataError& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return kDataError;
    } catch (const FormatError& e) {
        err << "format error: " << e.what() << '\n';
        return kDataError;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    }
    return kUsageError;
}

}  // namespace cooc::cli
