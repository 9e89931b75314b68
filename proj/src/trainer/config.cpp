#include "correct/trainer/config.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace correct::trainer {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const char* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end) throw ConfigError("config: bad value '" + value + "' for " + key);
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("config: bad boolean '" + value + "' for " + key);
}

std::string fmt_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

std::string fmt_bool(bool v) { return v ? "true" : "false"; }

}  // namespace

std::string head_name(Head head) {
    switch (head) {
        case Head::prompt: return "prompt";
        case Head::mlp: return "mlp";
        case Head::evidence_as_prompt: return "evidence-as-prompt";
    }
    return "prompt";
}

Head parse_head(const std::string& text) {
    if (text == "prompt") return Head::prompt;
    if (text == "mlp") return Head::mlp;
    if (text == "evidence-as-prompt") return Head::evidence_as_prompt;
    throw ConfigError("config: unknown head '" + text + "'");
}

ModelConfig ModelConfig::desk() { return ModelConfig{}; }

ModelConfig ModelConfig::full_scale() {
    ModelConfig c;
    c.steps = 12;
    c.d = 768;
    c.n_heads = 12;
    c.d_ff = 3072;
    c.max_len = 512;
    c.num_prompts = 8;
    c.tau = 100.0;
    return c;
}

void ModelConfig::validate() const {
    if (d == 0 || n_heads == 0 || d % n_heads != 0) {
        throw ConfigError("config: d=" + std::to_string(d) + " must be a positive multiple of n_heads=" +
                          std::to_string(n_heads));
    }
    if (steps == 0) throw ConfigError("config: steps must be >= 1");
    if (!(tau > 0)) throw ConfigError("config: tau must be > 0");
    if (max_len < num_prompts + 2) throw ConfigError("config: max_len must exceed num_prompts + 1");
    if (head == Head::evidence_as_prompt && num_prompts == 0) {
        throw ConfigError("config: evidence-as-prompt needs num_prompts >= 1");
    }
    if (prompt_init != "graph" && prompt_init != "random") throw ConfigError("config: prompt_init must be graph|random");
    if (optimizer != "adam" && optimizer != "sgd") throw ConfigError("config: optimizer must be adam|sgd");
    if (!(lr > 0)) throw ConfigError("config: lr must be > 0");
    if (batch_size == 0) throw ConfigError("config: batch_size must be >= 1");
    if (evidence_mode != "gold" && evidence_mode != "retrieved") {
        throw ConfigError("config: evidence_mode must be gold|retrieved");
    }
    if (min_token_count == 0) throw ConfigError("config: min_token_count must be >= 1");
    if (retrieve_k == 0) throw ConfigError("config: retrieve_k must be >= 1");
    if (target_train_f1 < 0 || target_train_f1 > 100) throw ConfigError("config: target_train_f1 must be in [0, 100]");
}

const std::vector<std::string>& ModelConfig::keys() {
    static const std::vector<std::string> k{
        "steps", "d", "n_heads", "d_ff", "max_len", "num_prompts", "tau", "head", "use_evidence_layer",
        "use_context_layer", "use_reference_layer", "use_prompt_encoder", "prompt_init", "optimizer", "lr",
        "epochs", "batch_size", "clip_norm", "target_train_f1", "seed", "evidence_mode", "retrieve_k",
        "exclude_nei", "max_sentences", "min_token_count"};
    return k;
}

std::string ModelConfig::get(const std::string& key) const {
    if (key == "steps") return std::to_string(steps);
    if (key == "d") return std::to_string(d);
    if (key == "n_heads") return std::to_string(n_heads);
    if (key == "d_ff") return std::to_string(d_ff);
    if (key == "max_len") return std::to_string(max_len);
    if (key == "num_prompts") return std::to_string(num_prompts);
    if (key == "tau") return fmt_double(tau);
    if (key == "head") return head_name(head);
    if (key == "use_evidence_layer") return fmt_bool(use_evidence_layer);
    if (key == "use_context_layer") return fmt_bool(use_context_layer);
    if (key == "use_reference_layer") return fmt_bool(use_reference_layer);
    if (key == "use_prompt_encoder") return fmt_bool(use_prompt_encoder);
    if (key == "prompt_init") return prompt_init;
    if (key == "optimizer") return optimizer;
    if (key == "lr") return fmt_double(lr);
    if (key == "epochs") return std::to_string(epochs);
    if (key == "batch_size") return std::to_string(batch_size);
    if (key == "clip_norm") return fmt_double(clip_norm);
    if (key == "target_train_f1") return fmt_double(target_train_f1);
    if (key == "seed") return std::to_string(seed);
    if (key == "evidence_mode") return evidence_mode;
    if (key == "retrieve_k") return std::to_string(retrieve_k);
    if (key == "exclude_nei") return fmt_bool(exclude_nei);
    if (key == "max_sentences") return std::to_string(max_sentences);
    if (key == "min_token_count") return std::to_string(min_token_count);
    throw ConfigError("config: unknown key '" + key + "'");
}

void ModelConfig::set(const std::string& key, const std::string& raw) {
    const std::string value = trim(raw);
    using Size = std::size_t;
    if (key == "steps") steps = parse_number<Size>(key, value);
    else if (key == "d") d = parse_number<Size>(key, value);
    else if (key == "n_heads") n_heads = parse_number<Size>(key, value);
    else if (key == "d_ff") d_ff = parse_number<Size>(key, value);
    else if (key == "max_len") max_len = parse_number<Size>(key, value);
    else if (key == "num_prompts") num_prompts = parse_number<Size>(key, value);
    else if (key == "tau") tau = parse_number<double>(key, value);
    else if (key == "head") head = parse_head(value);
    else if (key == "use_evidence_layer") use_evidence_layer = parse_bool(key, value);
    else if (key == "use_context_layer") use_context_layer = parse_bool(key, value);
    else if (key == "use_reference_layer") use_reference_layer = parse_bool(key, value);
    else if (key == "use_prompt_encoder") use_prompt_encoder = parse_bool(key, value);
    else if (key == "prompt_init") prompt_init = value;
    else if (key == "optimizer") optimizer = value;
    else if (key == "lr") lr = parse_number<double>(key, value);
    else if (key == "epochs") epochs = parse_number<Size>(key, value);
    else if (key == "batch_size") batch_size = parse_number<Size>(key, value);
    else if (key == "clip_norm") clip_norm = parse_number<double>(key, value);
    else if (key == "target_train_f1") target_train_f1 = parse_number<double>(key, value);
    else if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
    else if (key == "evidence_mode") evidence_mode = value;
    else if (key == "retrieve_k") retrieve_k = parse_number<Size>(key, value);
    else if (key == "exclude_nei") exclude_nei = parse_bool(key, value);
    else if (key == "max_sentences") max_sentences = parse_number<Size>(key, value);
    else if (key == "min_token_count") min_token_count = parse_number<Size>(key, value);
    else throw ConfigError("config: unknown key '" + key + "'");
}

std::map<std::string, std::string> ModelConfig::to_map() const {
    std::map<std::string, std::string> m;
    for (const auto& k : keys()) m[k] = get(k);
    return m;
}

std::string ModelConfig::hash() const {
    // FNV-1a over the sorted key=value lines.
    std::uint64_t h = 1469598103934665603ULL;
    for (const auto& [k, v] : to_map()) {
        if (k == "seed") continue;
        for (char c : k + "=" + v + "\n") {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ULL;
        }
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

encoder::EncoderConfig ModelConfig::encoder_config(std::size_t vocab_size) const {
    encoder::EncoderConfig e;
    e.vocab_size = vocab_size;
    e.d = d;
    e.n_heads = n_heads;
    e.steps = steps;
    e.d_ff = d_ff;
    e.max_len = max_len;
    e.use_evidence_layer = use_evidence_layer;
    e.use_context_layer = use_context_layer;
    e.use_reference_layer = use_reference_layer;
    return e;
}

prompting::PromptConfig ModelConfig::prompt_config() const {
    return {head == Head::prompt ? num_prompts : 0, tau, use_prompt_encoder};
}

std::vector<corpus::Label> ModelConfig::labels() const {
    if (exclude_nei) return {corpus::Label::support, corpus::Label::refute};
    return {corpus::kAllLabels.begin(), corpus::kAllLabels.end()};
}

ModelConfig load_config(const std::filesystem::path& path, ModelConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
        }
        try {
            base.set(trim(line.substr(0, eq)), line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    base.validate();
    return base;
}

void save_config(const std::filesystem::path& path, const ModelConfig& config) {
    std::ofstream out(path);
    if (!out) throw ConfigError("config: cannot write " + path.string());
    for (const auto& k : ModelConfig::keys()) out << k << " = " << config.get(k) << "\n";
}

}  // namespace correct::trainer
