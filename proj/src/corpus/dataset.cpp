#include "correct/corpus/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include "json.hpp"

#include "correct/util/random.hpp"

namespace correct::corpus {

using nlohmann::json;

std::string_view label_name(Label label) {
    switch (label) {
        case Label::support: return "SUPPORT";
        case Label::refute: return "REFUTE";
        case Label::nei: return "NEI";
    }
    return "?";
}

std::optional<Label> parse_label(std::string_view text) {
    for (Label l : kAllLabels)
        if (text == label_name(l)) return l;
    return std::nullopt;
}

std::string_view split_name(Split split) {
    switch (split) {
        case Split::all: return "all";
        case Split::train: return "train";
        case Split::valid: return "valid";
        case Split::test: return "test";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Corpus

namespace {

template <typename T>
std::unordered_map<std::string, std::size_t> index_by_id(const std::vector<T>& items,
                                                         std::string_view what) {
    std::unordered_map<std::string, std::size_t> index;
    index.reserve(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (!index.emplace(items[i].id, i).second) {
            throw DataError("duplicate " + std::string(what) + " id '" + items[i].id + "'");
        }
    }
    return index;
}

template <typename T>
const T* lookup(const std::vector<T>& items, const std::unordered_map<std::string, std::size_t>& index,
                const std::string& id) {
    auto it = index.find(id);
    return it == index.end() ? nullptr : &items[it->second];
}

}  // namespace

Corpus::Corpus(std::vector<EvidenceSentence> evidence, std::vector<Document> contexts,
               std::vector<Document> references)
    : evidence_(std::move(evidence)), contexts_(std::move(contexts)), references_(std::move(references)) {
    evidence_index_ = index_by_id(evidence_, "evidence");
    context_index_ = index_by_id(contexts_, "context");
    reference_index_ = index_by_id(references_, "reference");
}

const EvidenceSentence* Corpus::find_evidence(const std::string& id) const {
    return lookup(evidence_, evidence_index_, id);
}
const Document* Corpus::find_context(const std::string& id) const {
    return lookup(contexts_, context_index_, id);
}
const Document* Corpus::find_reference(const std::string& id) const {
    return lookup(references_, reference_index_, id);
}

const EvidenceSentence& Corpus::evidence(const std::string& id) const {
    if (const auto* e = find_evidence(id)) return *e;
    throw DataError("unknown evidence id '" + id + "'");
}
const Document& Corpus::context(const std::string& id) const {
    if (const auto* d = find_context(id)) return *d;
    throw DataError("unknown context id '" + id + "'");
}
const Document& Corpus::reference(const std::string& id) const {
    if (const auto* d = find_reference(id)) return *d;
    throw DataError("unknown reference id '" + id + "'");
}

void Corpus::validate() const {
    for (const auto& e : evidence_) {
        if (!find_context(e.context_id)) {
            throw DataError("evidence '" + e.id + "' has unknown context_id '" + e.context_id + "'");
        }
        for (const auto& r : e.reference_ids) {
            if (!find_reference(r)) {
                throw DataError("evidence '" + e.id + "' has unknown reference id '" + r + "'");
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Dataset

Dataset Dataset::with_claims(std::vector<Claim> subset, Split tag) const {
    return Dataset{std::move(subset), corpus, tag};
}

std::size_t Dataset::count(Label label) const {
    return static_cast<std::size_t>(
        std::count_if(claims.begin(), claims.end(), [&](const Claim& c) { return c.label == label; }));
}

std::vector<Label> Dataset::labels_present() const {
    std::vector<Label> out;
    for (Label l : kAllLabels)
        if (count(l) > 0) out.push_back(l);
    return out;
}

void Dataset::validate() const {
    if (!corpus) throw DataError("dataset has no corpus");
    std::unordered_set<std::string> seen;
    for (const auto& c : claims) {
        if (!seen.insert(c.id).second) throw DataError("duplicate claim id '" + c.id + "'");
        for (const auto& e : c.evidence_ids) {
            if (!corpus->find_evidence(e)) {
                throw DataError("claim '" + c.id + "' has unknown evidence id '" + e + "'");
            }
        }
    }
}

// ---------------------------------------------------------------------------
// JSONL

std::string truncate_sentences(std::string_view text, std::size_t max_sentences) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        if (ch != '.' && ch != '!' && ch != '?') continue;
        const bool boundary = i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1]));
        if (!boundary) continue;
        if (++count == max_sentences) return std::string(text.substr(0, i + 1));
    }
    return std::string(text);
}

namespace {

template <typename Fn>
void for_each_line(const std::filesystem::path& path, Fn&& fn) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = path.filename().string() + ":" + std::to_string(lineno) + ": ";
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError(where + "invalid JSON (" + e.what() + ")");
        }
        try {
            fn(obj, where);
        } catch (const json::exception& e) {
            throw DataError(where + "bad field (" + e.what() + ")");
        }
    }
}

std::vector<std::string> string_list(const json& obj, const char* key) {
    if (!obj.contains(key) || obj.at(key).is_null()) return {};
    return obj.at(key).get<std::vector<std::string>>();
}

}  // namespace

std::vector<Claim> read_claims(const std::filesystem::path& path) {
    std::vector<Claim> claims;
    std::unordered_set<std::string> ids;
    for_each_line(path, [&](const json& obj, const std::string& where) {
        Claim c;
        c.id = obj.at("id").get<std::string>();
        c.text = obj.at("text").get<std::string>();
        const auto label = obj.at("label").get<std::string>();
        const auto parsed = parse_label(label);
        if (!parsed) throw DataError(where + "unknown label '" + label + "'");
        c.label = *parsed;
        c.evidence_ids = string_list(obj, "evidence_ids");
        if (!ids.insert(c.id).second) throw DataError(where + "duplicate claim id '" + c.id + "'");
        claims.push_back(std::move(c));
    });
    return claims;
}

std::vector<EvidenceSentence> read_evidence(const std::filesystem::path& path) {
    std::vector<EvidenceSentence> out;
    std::unordered_set<std::string> ids;
    for_each_line(path, [&](const json& obj, const std::string& where) {
        EvidenceSentence e;
        e.id = obj.at("id").get<std::string>();
        e.text = obj.at("text").get<std::string>();
        e.context_id = obj.at("context_id").get<std::string>();
        e.reference_ids = string_list(obj, "reference_ids");
        if (!ids.insert(e.id).second) throw DataError(where + "duplicate evidence id '" + e.id + "'");
        out.push_back(std::move(e));
    });
    return out;
}

std::vector<Document> read_documents(const std::filesystem::path& path, DocumentKind kind,
                                     std::size_t max_sentences) {
    std::vector<Document> out;
    std::unordered_set<std::string> ids;
    for_each_line(path, [&](const json& obj, const std::string& where) {
        Document d;
        d.id = obj.at("id").get<std::string>();
        d.text = truncate_sentences(obj.at("text").get<std::string>(), max_sentences);
        d.kind = kind;
        if (!ids.insert(d.id).second) throw DataError(where + "duplicate document id '" + d.id + "'");
        out.push_back(std::move(d));
    });
    return out;
}

namespace {

std::size_t find_line_of(const std::filesystem::path& path, const std::string& id) {
    std::ifstream in(path);
    std::string line;
    std::size_t lineno = 0;
    const std::string needle = "\"" + id + "\"";
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find(needle) != std::string::npos) return lineno;
    }
    return 0;
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& claim_path, const std::filesystem::path& evidence_path,
                     const std::filesystem::path& context_path,
                     const std::filesystem::path& reference_path, std::size_t max_sentences) {
    auto evidence = read_evidence(evidence_path);
    auto contexts = read_documents(context_path, DocumentKind::context, max_sentences);
    auto references = read_documents(reference_path, DocumentKind::reference, max_sentences);

    // Line-numbered integrity errors for evidence rows.
    {
        std::unordered_set<std::string> ctx_ids;
        std::unordered_set<std::string> ref_ids;
        for (const auto& c : contexts) ctx_ids.insert(c.id);
        for (const auto& r : references) ref_ids.insert(r.id);
        for (const auto& e : evidence) {
            auto where = [&] {
                return evidence_path.filename().string() + ":" +
                       std::to_string(find_line_of(evidence_path, e.id)) + ": ";
            };
            if (!ctx_ids.count(e.context_id)) {
                throw DataError(where() + "evidence '" + e.id + "' has dangling context_id '" +
                                e.context_id + "'");
            }
            for (const auto& r : e.reference_ids) {
                if (!ref_ids.count(r)) {
                    throw DataError(where() + "evidence '" + e.id + "' has dangling reference id '" + r + "'");
                }
            }
        }
    }

    auto corpus = std::make_shared<const Corpus>(std::move(evidence), std::move(contexts),
                                                 std::move(references));
    return load_claims(claim_path, std::move(corpus));
}

Dataset load_claims(const std::filesystem::path& claim_path, std::shared_ptr<const Corpus> corpus,
                    Split split) {
    Dataset ds{read_claims(claim_path), std::move(corpus), split};
    for (const auto& c : ds.claims) {
        for (const auto& e : c.evidence_ids) {
            if (!ds.corpus->find_evidence(e)) {
                throw DataError(claim_path.filename().string() + ":" +
                                std::to_string(find_line_of(claim_path, c.id)) + ": claim '" + c.id +
                                "' has dangling evidence id '" + e + "'");
            }
        }
    }
    return ds;
}

void write_claims(const std::filesystem::path& path, const std::vector<Claim>& claims) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    for (const auto& c : claims) {
        out << json{{"id", c.id},
                    {"text", c.text},
                    {"label", label_name(c.label)},
                    {"evidence_ids", c.evidence_ids}}
                   .dump()
            << '\n';
    }
}

void write_corpus(const std::filesystem::path& dir, const Corpus& corpus) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "evidence.jsonl", std::ios::trunc);
        for (const auto& e : corpus.evidence()) {
            out << json{{"id", e.id},
                        {"text", e.text},
                        {"context_id", e.context_id},
                        {"reference_ids", e.reference_ids}}
                       .dump()
                << '\n';
        }
    }
    auto write_docs = [&](const char* name, const std::vector<Document>& docs) {
        std::ofstream out(dir / name, std::ios::trunc);
        for (const auto& d : docs) out << json{{"id", d.id}, {"text", d.text}}.dump() << '\n';
    };
    write_docs("contexts.jsonl", corpus.contexts());
    write_docs("references.jsonl", corpus.references());
}

// ---------------------------------------------------------------------------
// Sampling

Dataset sample_few_shot(const Dataset& dataset, std::size_t k, std::uint64_t seed,
                        std::optional<std::vector<Label>> labels) {
    const auto label_set = labels ? *labels : dataset.labels_present();
    util::Rng rng(seed);
    std::vector<Claim> picked;
    for (Label l : label_set) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < dataset.claims.size(); ++i)
            if (dataset.claims[i].label == l) idx.push_back(i);
        if (idx.size() < k) {
            throw DataError("few-shot: label " + std::string(label_name(l)) + " has " +
                            std::to_string(idx.size()) + " claims, need " + std::to_string(k));
        }
        util::shuffle(idx, rng);
        for (std::size_t i = 0; i < k; ++i) picked.push_back(dataset.claims[idx[i]]);
    }
    return dataset.with_claims(std::move(picked), dataset.split);
}

namespace {

std::vector<std::size_t> part_sizes(std::size_t n, const std::vector<double>& ratios) {
    std::vector<std::size_t> sizes(ratios.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < ratios.size(); ++i) {
        const double exact = ratios[i] * static_cast<double>(n);
        // Guard against 0.8 * 100 = 79.999...
        sizes[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
        assigned += sizes[i];
        remainders.emplace_back(exact - static_cast<double>(sizes[i]), i);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t j = 0; assigned < n; ++j, ++assigned) ++sizes[remainders[j % remainders.size()].second];
    return sizes;
}

}  // namespace

std::vector<Dataset> split_dataset(const Dataset& dataset, const std::vector<double>& ratios,
                                   std::uint64_t seed, const std::vector<Label>& labels) {
    if (ratios.empty()) throw std::invalid_argument("split: no ratios given");
    const double total = std::accumulate(ratios.begin(), ratios.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-9 || std::any_of(ratios.begin(), ratios.end(), [](double r) { return r < 0; })) {
        throw std::invalid_argument("split: ratios must be non-negative and sum to 1");
    }

    util::Rng rng(seed);
    std::vector<std::vector<std::size_t>> by_label;
    for (Label l : labels) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < dataset.claims.size(); ++i)
            if (dataset.claims[i].label == l) idx.push_back(i);
        if (idx.empty()) {
            throw DataError("split: label " + std::string(label_name(l)) +
                            " has no claims, stratification impossible");
        }
        util::shuffle(idx, rng);
        by_label.push_back(std::move(idx));
    }
    for (const auto& c : dataset.claims) {
        if (std::find(labels.begin(), labels.end(), c.label) == labels.end()) {
            throw DataError("split: claim '" + c.id + "' has label outside the split label set");
        }
    }

    // Round-robin over labels gives a stratified order; cutting it into consecutive
    // chunks keeps every part close to the global label proportions.
    std::vector<std::size_t> order;
    for (std::size_t round = 0; order.size() < dataset.claims.size(); ++round)
        for (const auto& idx : by_label)
            if (round < idx.size()) order.push_back(idx[round]);

    const auto sizes = part_sizes(order.size(), ratios);
    std::vector<Dataset> parts;
    std::size_t pos = 0;
    for (std::size_t s : sizes) {
        std::vector<Claim> claims;
        for (std::size_t i = 0; i < s; ++i) claims.push_back(dataset.claims[order[pos + i]]);
        pos += s;
        parts.push_back(dataset.with_claims(std::move(claims), dataset.split));
    }
    return parts;
}

ProtocolSplit protocol_split(const Dataset& dataset, std::uint64_t seed, const std::vector<Label>& labels) {
    auto outer = split_dataset(dataset, {0.8, 0.2}, seed, labels);
    auto inner = split_dataset(outer[0], {0.9, 0.1}, seed + 1, labels);
    ProtocolSplit out{std::move(inner[0]), std::move(inner[1]), std::move(outer[1])};
    out.train.split = Split::train;
    out.valid.split = Split::valid;
    out.test.split = Split::test;
    return out;
}

Dataset exclude_nei(const Dataset& dataset) {
    std::vector<Claim> kept;
    for (const auto& c : dataset.claims)
        if (c.label != Label::nei) kept.push_back(c);
    return dataset.with_claims(std::move(kept), dataset.split);
}

}  // namespace correct::corpus
