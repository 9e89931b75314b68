// Command-line front end: synth, retrieve, fewshot, train, eval, ablate, report, gradcheck.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "correct/corpus/synthetic.hpp"
#include "correct/retrieval/bm25.hpp"
#include "correct/trainer/diagnostics.hpp"
#include "correct/trainer/train.hpp"

namespace fs = std::filesystem;
using namespace correct;

namespace {

struct DataArgs {
    fs::path dir;
    std::size_t max_sentences = corpus::kDefaultMaxSentences;
};

corpus::Dataset load_dir(const DataArgs& a) {
    return corpus::load_dataset(a.dir / "claims.jsonl", a.dir / "evidence.jsonl", a.dir / "contexts.jsonl",
                                a.dir / "references.jsonl", a.max_sentences);
}

void add_data_option(CLI::App* cmd, DataArgs& a) {
    cmd->add_option("--data", a.dir, "Directory with claims/evidence/contexts/references .jsonl")->required();
}

/// --config FILE plus one --<key> flag per configuration key.
struct ConfigArgs {
    std::optional<fs::path> file;
    std::map<std::string, std::string> overrides;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", file, "key = value configuration file");
        for (const auto& key : trainer::ModelConfig::keys()) {
            cmd->add_option_function<std::string>(
                "--" + key, [this, key](const std::string& v) { overrides[key] = v; },
                "Override '" + key + "' (default " + trainer::ModelConfig::desk().get(key) + ")");
        }
    }

    trainer::ModelConfig build() const {
        auto cfg = file ? trainer::load_config(*file) : trainer::ModelConfig::desk();
        for (const auto& [k, v] : overrides) cfg.set(k, v);
        cfg.validate();
        return cfg;
    }
};

void write_json(const std::optional<fs::path>& path, const nlohmann::json& j) {
    if (!path) {
        std::cout << j.dump(2) << "\n";
        return;
    }
    std::ofstream out(*path);
    if (!out) throw std::runtime_error("cannot write " + path->string());
    out << j.dump(2) << "\n";
}

const corpus::Dataset& pick_split(const corpus::ProtocolSplit& s, const corpus::Dataset& all, const std::string& name) {
    if (name == "train") return s.train;
    if (name == "valid") return s.valid;
    if (name == "test") return s.test;
    if (name == "all") return all;
    throw CLI::ValidationError("--split", "expected train|valid|test|all");
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoul(item));
    return out;
}

void print_warnings(const trainer::Model& model) {
    for (const auto& w : model.warnings()) std::cerr << "warning: " << w << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Evidence-graph fact verification with conditioned prompts"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
    fs::path synth_out;
    std::uint64_t synth_seed = 1;
    corpus::SyntheticConfig synth_cfg;
    synth->add_option("--out", synth_out, "Output directory")->required();
    synth->add_option("--seed", synth_seed, "Generator seed");
    synth->add_option("--claims-per-class", synth_cfg.claims_per_class, "Claims per label");
    synth->add_option("--reference-fraction", synth_cfg.reference_fraction, "Share of reference-dependent claims");
    synth->add_option("--filler-sentences", synth_cfg.filler_sentences, "Filler sentences around document content");
    synth->add_option("--first-names", synth_cfg.first_names, "First-name pool size (2-26)");
    synth->add_option("--last-names", synth_cfg.last_names, "Last-name pool size (2-26)");
    synth->add_option("--attributes", synth_cfg.attributes, "Attribute pool size (1-8)");
    synth->add_option("--values", synth_cfg.values, "Value pool size (2-12)");
    synth->add_option("--extra-evidence", synth_cfg.extra_evidence_prob, "Probability of a second evidence sentence");

    // retrieve
    auto* retrieve = app.add_subcommand("retrieve", "BM25 top-k evidence ids per claim");
    DataArgs retrieve_data;
    std::size_t retrieve_k = 3;
    std::uint64_t retrieve_seed = 0;
    std::optional<fs::path> retrieve_out;
    add_data_option(retrieve, retrieve_data);
    retrieve->add_option("--k", retrieve_k, "Sentences per claim");
    retrieve->add_option("--seed", retrieve_seed, "Accepted for uniformity; retrieval is deterministic");
    retrieve->add_option("--out", retrieve_out, "Output JSONL (default stdout)");

    // fewshot
    auto* fewshot = app.add_subcommand("fewshot", "Sample k claims per label");
    DataArgs fewshot_data;
    std::size_t fewshot_k = 5;
    std::uint64_t fewshot_seed = 1;
    fs::path fewshot_out;
    add_data_option(fewshot, fewshot_data);
    fewshot->add_option("--k", fewshot_k, "Claims per label");
    fewshot->add_option("--seed", fewshot_seed, "Sampling seed");
    fewshot->add_option("--out", fewshot_out, "Output claims JSONL")->required();

    // train
    auto* train_cmd = app.add_subcommand("train", "Train on the protocol train split");
    DataArgs train_data;
    ConfigArgs train_cfg;
    fs::path train_out = "model.ckpt";
    std::optional<fs::path> train_log, train_claims;
    std::uint64_t split_seed = 1;
    add_data_option(train_cmd, train_data);
    train_cfg.attach(train_cmd);
    train_cmd->add_option("--out", train_out, "Checkpoint path");
    train_cmd->add_option("--log", train_log, "Per-epoch JSONL loss log");
    train_cmd->add_option("--claims", train_claims, "Train on this claims file instead of the protocol split");
    train_cmd->add_option("--split-seed", split_seed, "Seed of the 80:20 / 10% split");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
    DataArgs eval_data;
    fs::path eval_ckpt;
    std::string eval_split = "test";
    std::optional<fs::path> eval_out;
    std::uint64_t eval_split_seed = 1;
    std::optional<std::uint64_t> eval_seed;
    add_data_option(eval_cmd, eval_data);
    eval_cmd->add_option("--checkpoint", eval_ckpt, "Checkpoint path")->required();
    eval_cmd->add_option("--split", eval_split, "train|valid|test|all");
    eval_cmd->add_option("--split-seed", eval_split_seed, "Seed of the 80:20 / 10% split");
    eval_cmd->add_option("--seed", eval_seed, "Recorded in the report (defaults to the checkpoint seed)");
    eval_cmd->add_option("--out", eval_out, "Report JSON (default stdout)");

    // ablate
    auto* ablate_cmd = app.add_subcommand("ablate", "Train and evaluate an ablation variant over several seeds");
    DataArgs ablate_data;
    ConfigArgs ablate_cfg;
    std::string variant = "full";
    std::size_t seeds = 5;
    std::string m_values = "0,2,4,8";
    std::string subset = "all";
    std::uint64_t ablate_split_seed = 1;
    std::optional<fs::path> ablate_out;
    add_data_option(ablate_cmd, ablate_data);
    ablate_cfg.attach(ablate_cmd);
    ablate_cmd->add_option("--variant", variant, "full or one of the ablation variants");
    ablate_cmd->add_option("--seeds", seeds, "Independent runs");
    ablate_cmd->add_option("--m-values", m_values, "Comma-separated prompt counts for M-sweep");
    ablate_cmd->add_option("--subset", subset, "Test subset: all|reference-dependent");
    ablate_cmd->add_option("--split-seed", ablate_split_seed, "Seed of the 80:20 / 10% split");
    ablate_cmd->add_option("--out", ablate_out, "Results JSON (default stdout)");

    // report
    auto* report_cmd = app.add_subcommand("report", "Attention dump for one claim");
    DataArgs report_data;
    fs::path report_ckpt;
    std::string report_claim;
    std::uint64_t report_seed = 0;
    std::optional<fs::path> report_out;
    add_data_option(report_cmd, report_data);
    report_cmd->add_option("--checkpoint", report_ckpt, "Checkpoint path")->required();
    report_cmd->add_option("--claim", report_claim, "Claim id")->required();
    report_cmd->add_option("--seed", report_seed, "Accepted for uniformity; the report is deterministic");
    report_cmd->add_option("--out", report_out, "Report JSON (default stdout)");

    // gradcheck
    auto* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference check of the full loss on toy graphs");
    std::uint64_t grad_seed = 1;
    std::size_t grad_graphs = 10;
    double grad_tol = 1e-4;
    grad_cmd->add_option("--seed", grad_seed, "Seed for graphs and parameters");
    grad_cmd->add_option("--graphs", grad_graphs, "Number of toy graphs");
    grad_cmd->add_option("--tolerance", grad_tol, "Maximum relative error");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) {
            auto ds = corpus::generate_synthetic(synth_cfg, synth_seed);
            fs::create_directories(synth_out);
            corpus::write_claims(synth_out / "claims.jsonl", ds.claims);
            corpus::write_corpus(synth_out, *ds.corpus);
            std::cout << "wrote " << ds.claims.size() << " claims to " << synth_out.string() << "\n";
        } else if (*retrieve) {
            auto ds = load_dir(retrieve_data);
            auto hits = retrieval::retrieve_for_claims(ds, retrieve_k);
            std::ofstream file;
            if (retrieve_out) file.open(*retrieve_out);
            std::ostream& out = retrieve_out ? static_cast<std::ostream&>(file) : std::cout;
            for (const auto& c : ds.claims) out << nlohmann::json{{"claim_id", c.id}, {"evidence_ids", hits.at(c.id)}}.dump() << "\n";
        } else if (*fewshot) {
            auto ds = load_dir(fewshot_data);
            auto sample = corpus::sample_few_shot(ds, fewshot_k, fewshot_seed);
            corpus::write_claims(fewshot_out, sample.claims);
            std::cout << "wrote " << sample.claims.size() << " claims to " << fewshot_out.string() << "\n";
        } else if (*train_cmd) {
            auto cfg = train_cfg.build();
            train_data.max_sentences = cfg.max_sentences;
            auto ds = load_dir(train_data);
            auto split = corpus::protocol_split(ds, split_seed, cfg.labels());
            const auto train_set = train_claims ? corpus::load_claims(*train_claims, ds.corpus, corpus::Split::train) : split.train;
            trainer::TrainOptions opts;
            opts.log_path = train_log;
            opts.checkpoint_path = train_out;
            opts.on_epoch = [](const trainer::EpochLog& e) { std::cerr << e.to_json().dump() << "\n"; };
            auto result = trainer::train(cfg, train_set, &split.valid, opts);
            print_warnings(result.model);
            std::cout << "trained " << result.log.size() << " epochs; checkpoint " << train_out.string() << "\n";
        } else if (*eval_cmd) {
            auto model = trainer::Model::load(eval_ckpt);
            eval_data.max_sentences = model.config().max_sentences;
            auto ds = load_dir(eval_data);
            auto split = corpus::protocol_split(ds, eval_split_seed, model.config().labels());
            auto report = trainer::evaluate(model, pick_split(split, ds, eval_split));
            if (eval_seed) report.seed = *eval_seed;
            write_json(eval_out, report.to_json());
        } else if (*ablate_cmd) {
            auto cfg = ablate_cfg.build();
            ablate_data.max_sentences = cfg.max_sentences;
            auto ds = load_dir(ablate_data);
            auto split = corpus::protocol_split(ds, ablate_split_seed, cfg.labels());
            corpus::Dataset test = split.test;
            if (subset == "reference-dependent") test = corpus::reference_dependent_subset(test);
            else if (subset != "all") throw CLI::ValidationError("--subset", "expected all|reference-dependent");
            auto results = trainer::ablate(cfg, variant, split.train, &split.valid, test, seeds, parse_sizes(m_values));
            nlohmann::json j = nlohmann::json::array();
            for (const auto& r : results) j.push_back(r.to_json());
            write_json(ablate_out, j);
        } else if (*report_cmd) {
            auto model = trainer::Model::load(report_ckpt);
            report_data.max_sentences = model.config().max_sentences;
            auto ds = trainer::apply_data_protocol(model.config(), load_dir(report_data));
            const corpus::Claim* claim = nullptr;
            for (const auto& c : ds.claims)
                if (c.id == report_claim) claim = &c;
            if (!claim) throw std::runtime_error("unknown claim id '" + report_claim + "'");
            write_json(report_out, trainer::case_report(model, *claim, *ds.corpus));
        } else if (*grad_cmd) {
            bool ok = true;
            for (const auto& g : trainer::toy_gradient_checks(grad_seed, grad_graphs)) {
                const bool pass = g.result.passed(grad_tol);
                ok = ok && pass;
                std::cout << (pass ? "ok  " : "FAIL") << " evidence=" << g.evidence << " references=" << g.references
                          << " coords=" << g.result.coordinates << " max_rel_error=" << g.result.max_rel_error
                          << " worst=" << g.result.worst << "\n";
            }
            return ok ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
