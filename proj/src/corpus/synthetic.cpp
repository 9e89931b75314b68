#include "correct/corpus/synthetic.hpp"

#include <array>
#include <cmath>
#include <set>

#include "correct/util/random.hpp"

namespace correct::corpus {

namespace {

// Distinct initials within each pool keep acronyms unique per entity.
constexpr std::array<const char*, 26> kFirstNames = {
    "adrin", "belko", "corvan", "dalmo", "evrin", "farlo", "gavro", "hemlin", "istar",
    "jorvik", "kelmar", "lurin", "morvan", "nadro", "orlin", "pelko", "quarn", "rovik",
    "selmar", "tavro", "ulmin", "velko", "wendar", "xavro", "yorin", "zelmar"};
constexpr std::array<const char*, 26> kLastNames = {
    "ashby", "brenn", "calder", "dunmore", "ellery", "fenwick", "garrow", "holt", "irwin",
    "jarrett", "kestrel", "lowell", "marsh", "norcross", "oakes", "prescott", "quill", "radley",
    "stroud", "thorne", "upton", "vance", "whitlock", "xander", "yardley", "zeller"};
constexpr std::array<const char*, 8> kAttributes = {"color", "origin", "size", "shape",
                                                    "texture", "flavor", "rank", "era"};
constexpr std::array<const char*, 12> kValues = {"red", "blue", "green", "amber", "violet", "silver",
                                                 "black", "white", "golden", "crimson", "teal", "ivory"};
constexpr std::array<const char*, 6> kFillers = {
    "this record was compiled from public sources.",
    "the entry has been reviewed by the archive staff.",
    "several related entries are listed below.",
    "the listing follows the standard registry format.",
    "further details appear in the appendix.",
    "the registry was updated last spring."};
constexpr std::array<const char*, 12> kConsonants = {"b", "d", "f", "g", "k", "l",
                                                     "m", "n", "p", "r", "s", "t"};
constexpr std::array<const char*, 5> kVowels = {"a", "e", "i", "o", "u"};

struct Entity {
    std::size_t first = 0;
    std::size_t last = 0;

    std::string full_name() const { return std::string(kFirstNames[first]) + " " + kLastNames[last]; }
    std::string acronym() const {
        return std::string(1, kFirstNames[first][0]) + std::string(1, kLastNames[last][0]);
    }
};

class World {
  public:
    World(const SyntheticConfig& cfg, std::uint64_t seed) : cfg_(cfg), rng_(seed) {
        for (std::size_t i = 0; i < cfg.alias_syllables; ++i) {
            syllables_.push_back(std::string(kConsonants[i % kConsonants.size()]) +
                                 kVowels[(i / kConsonants.size()) % kVowels.size()]);
        }
    }

    Dataset build() {
        std::vector<Claim> claims;
        const std::size_t n = cfg_.claims_per_class;
        const auto ref_count = static_cast<std::size_t>(std::llround(cfg_.reference_fraction * static_cast<double>(n)));
        for (std::size_t i = 0; i < n; ++i) {
            for (Label label : kAllLabels) claims.push_back(make_claim(label, i < ref_count));
        }
        auto corpus = std::make_shared<const Corpus>(std::move(evidence_), std::move(contexts_),
                                                     std::move(references_));
        return Dataset{std::move(claims), std::move(corpus), Split::all};
    }

  private:
    Entity random_entity() {
        Entity e;
        do {
            e = {util::bounded(rng_, cfg_.first_names), util::bounded(rng_, cfg_.last_names)};
        } while (collides_with_text(e.acronym()));
        return e;
    }

    // Two-letter words used in generated sentences.
    static bool collides_with_text(const std::string& acronym) {
        return acronym == "of" || acronym == "is" || acronym == "by" || acronym == "in";
    }

    Entity distinct_entity(const Entity& from) {
        Entity e;
        do {
            e = random_entity();
        } while (e.first == from.first || e.last == from.last);
        return e;
    }

    std::size_t other_value(std::size_t v) {
        std::size_t w;
        do {
            w = util::bounded(rng_, cfg_.values);
        } while (w == v);
        return w;
    }

    std::string fresh_alias() {
        std::string alias;
        do {
            alias.clear();
            for (int s = 0; s < 3; ++s) alias += syllables_[util::bounded(rng_, syllables_.size())];
        } while (!used_aliases_.insert(alias).second);
        return alias;
    }

    std::string filler() { return kFillers[util::bounded(rng_, kFillers.size())]; }

    std::string fact(std::size_t attr, const std::string& subject, std::size_t value) const {
        return std::string("the ") + kAttributes[attr] + " of " + subject + " is " + kValues[value] + ".";
    }

    static std::string numbered(const char* prefix, std::size_t n) {
        std::string digits = std::to_string(n);
        return prefix + std::string(digits.size() < 4 ? 4 - digits.size() : 0, '0') + digits;
    }

    Claim make_claim(Label label, bool reference_dependent) {
        const Entity subject = random_entity();
        const std::size_t attr = util::bounded(rng_, cfg_.attributes);
        const std::size_t value = util::bounded(rng_, cfg_.values);

        // The entity the evidence actually talks about, and the value it states.
        Entity mentioned = subject;
        std::size_t stated = value;
        switch (label) {
            case Label::support: break;
            case Label::refute: stated = other_value(value); break;
            case Label::nei:
                mentioned = distinct_entity(subject);
                // Agreeing and conflicting values are equally likely, so the evidence text
                // alone matches SUPPORT or REFUTE.
                if (util::unit(rng_) < 0.5) stated = other_value(value);
                break;
        }

        const std::string mention = reference_dependent ? fresh_alias() : mentioned.acronym();

        std::vector<std::string> ev_texts{fact(attr, mention, stated)};
        if (util::unit(rng_) < cfg_.extra_evidence_prob && cfg_.attributes > 1) {
            std::size_t attr2;
            do {
                attr2 = util::bounded(rng_, cfg_.attributes);
            } while (attr2 == attr);
            ev_texts.push_back(fact(attr2, mention, util::bounded(rng_, cfg_.values)));
        }

        std::string ctx_text;
        for (std::size_t f = 0; f < cfg_.filler_sentences; ++f) ctx_text += filler() + " ";
        if (!reference_dependent) ctx_text += mention + " stands for " + mentioned.full_name() + ". ";
        for (const auto& t : ev_texts) ctx_text += t + " ";
        ctx_text += filler();
        const std::string ctx_id = numbered("ctx", contexts_.size() + 1);
        contexts_.push_back({ctx_id, ctx_text, DocumentKind::context});

        std::vector<std::string> ref_ids;
        if (reference_dependent) {
            std::string ref_text = mention + " is another name for " + mentioned.full_name() + ".";
            for (std::size_t f = 0; f < cfg_.filler_sentences; ++f) ref_text += " " + filler();
            ref_ids.push_back(numbered("ref", references_.size() + 1));
            references_.push_back({ref_ids.back(), ref_text, DocumentKind::reference});
        }

        Claim claim;
        claim.id = numbered("c", ++claim_counter_);
        claim.text = fact(attr, subject.full_name(), value);
        claim.label = label;
        for (const auto& t : ev_texts) {
            const std::string ev_id = numbered("e", evidence_.size() + 1);
            evidence_.push_back({ev_id, t, ctx_id, ref_ids});
            claim.evidence_ids.push_back(ev_id);
        }
        return claim;
    }

    const SyntheticConfig& cfg_;
    util::Rng rng_;
    std::vector<std::string> syllables_;
    std::set<std::string> used_aliases_;
    std::vector<EvidenceSentence> evidence_;
    std::vector<Document> contexts_;
    std::vector<Document> references_;
    std::size_t claim_counter_ = 0;
};

}  // namespace

Dataset generate_synthetic(const SyntheticConfig& config, std::uint64_t seed) {
    if (config.first_names < 2 || config.first_names > kFirstNames.size() || config.last_names < 2 ||
        config.last_names > kLastNames.size()) {
        throw DataError("synthetic: name pools must hold between 2 and 26 names");
    }
    if (config.attributes < 1 || config.attributes > kAttributes.size() || config.values < 2 ||
        config.values > kValues.size()) {
        throw DataError("synthetic: need 1..8 attributes and 2..12 values");
    }
    if (config.claims_per_class == 0) throw DataError("synthetic: claims_per_class must be positive");
    const std::size_t max_syllables = kConsonants.size() * kVowels.size();
    if (config.alias_syllables > max_syllables) {
        throw DataError("synthetic: at most " + std::to_string(max_syllables) + " alias syllables");
    }
    // One fresh alias per reference-dependent claim; require headroom so sampling terminates.
    const auto s = static_cast<double>(config.alias_syllables);
    const double available = s * s * s;
    const double needed = std::ceil(config.reference_fraction * static_cast<double>(config.claims_per_class)) *
                          static_cast<double>(kNumLabels);
    if (needed * 2.0 > available) {
        throw DataError("synthetic: alias vocabulary too small for unique aliases (" +
                        std::to_string(static_cast<long long>(available)) + " available, " +
                        std::to_string(static_cast<long long>(needed)) + " needed)");
    }
    World world(config, seed);
    return world.build();
}

Dataset reference_dependent_subset(const Dataset& dataset) {
    std::vector<Claim> kept;
    for (const auto& c : dataset.claims) {
        bool has_refs = false;
        for (const auto& e : c.evidence_ids)
            has_refs = has_refs || !dataset.corpus->evidence(e).reference_ids.empty();
        if (has_refs) kept.push_back(c);
    }
    return dataset.with_claims(std::move(kept), dataset.split);
}

}  // namespace correct::corpus
