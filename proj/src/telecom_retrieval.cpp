#include <algorithm>
#include <set>

#include "json.hpp"
#include "wflow/telecom.hpp"
#include "wflow/util.hpp"

namespace wflow::telecom {

using nlohmann::json;

FormulaIndex::FormulaIndex(std::vector<FormulaEntry> entries,
                           std::map<std::string, std::vector<std::string>> synonyms)
    : entries_(std::move(entries)), synonyms_(std::move(synonyms)) {
    for (size_t i = 0; i < entries_.size(); ++i)
        for (const auto& kw : entries_[i].keywords) keyword_index_[lowercase(kw)].push_back(i);
}

FormulaIndex FormulaIndex::load(const std::string& json_path) {
    json doc = json::parse(read_file(json_path));
    std::vector<FormulaEntry> entries;
    for (const auto& e : doc.at("formulas")) {
        FormulaEntry fe;
        fe.id = e.at("id").get<std::string>();
        fe.name = e.at("name").get<std::string>();
        fe.latex = e.at("latex").get<std::string>();
        fe.notes = e.value("notes", std::string());
        fe.category = e.at("category").get<std::string>();
        fe.reconstructed = e.value("reconstructed", false);
        json vars = e.value("variables", json::object());
        for (const auto& kv : vars.items())
            fe.variables.emplace_back(kv.key(), kv.value().get<std::string>());
        for (const auto& kw : e.at("keywords")) fe.keywords.push_back(kw.get<std::string>());
        entries.push_back(std::move(fe));
    }
    std::map<std::string, std::vector<std::string>> synonyms;
    json synonym_map = doc.value("synonyms", json::object());
    for (const auto& kv : synonym_map.items())
        for (const auto& s : kv.value()) synonyms[kv.key()].push_back(s.get<std::string>());
    return FormulaIndex(std::move(entries), std::move(synonyms));
}

std::vector<std::string> FormulaIndex::expand_query(const std::string& query) const {
    std::vector<std::string> tokens = tokenize_words(query);
    std::set<std::string> seen(tokens.begin(), tokens.end());
    std::vector<std::string> out = tokens;
    auto add = [&](const std::string& t) {
        if (seen.insert(t).second) out.push_back(t);
    };
    // single-token synonyms
    for (const auto& t : tokens) {
        auto it = synonyms_.find(t);
        if (it != synonyms_.end())
            for (const auto& s : it->second) add(lowercase(s));
    }
    // multi-word phrases, e.g. "bit error" -> "ber"
    std::string joined;
    for (size_t i = 0; i < tokens.size(); ++i) joined += (i ? " " : "") + tokens[i];
    for (const auto& [phrase, expansions] : synonyms_) {
        if (phrase.find(' ') == std::string::npos) continue;
        if (joined.find(phrase) != std::string::npos)
            for (const auto& s : expansions) add(lowercase(s));
    }
    return out;
}

std::vector<RetrievalHit> FormulaIndex::retrieve(const std::string& query, int k) const {
    std::vector<std::string> tokens = expand_query(query);
    if (tokens.empty() || k <= 0) return {};

    std::vector<MatchFlags> flags(entries_.size());
    for (const auto& token : tokens) {
        auto it = keyword_index_.find(token);
        if (it != keyword_index_.end())
            for (size_t idx : it->second) flags[idx].keyword = true;
    }
    for (size_t i = 0; i < entries_.size(); ++i) {
        const FormulaEntry& e = entries_[i];
        std::string name_lc = lowercase(e.name);
        std::string notes_lc = lowercase(e.notes);
        std::string tex_lc = lowercase(e.latex);
        std::string cat_lc = lowercase(e.category);
        for (const auto& token : tokens) {
            if (!flags[i].name && name_lc.find(token) != std::string::npos) flags[i].name = true;
            if (!flags[i].notes && notes_lc.find(token) != std::string::npos)
                flags[i].notes = true;
            if (!flags[i].tex && tex_lc.find(token) != std::string::npos) flags[i].tex = true;
            if (!flags[i].category && token == cat_lc) flags[i].category = true;
        }
    }

    std::vector<RetrievalHit> hits;
    for (size_t i = 0; i < entries_.size(); ++i) {
        double score = flags[i].score();
        if (score > 0.0) hits.push_back({&entries_[i], flags[i], score});
    }
    std::sort(hits.begin(), hits.end(), [](const RetrievalHit& a, const RetrievalHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.entry->id < b.entry->id;
    });
    if (hits.size() > static_cast<size_t>(k)) hits.resize(static_cast<size_t>(k));
    return hits;
}

std::string render_hit(const RetrievalHit& hit) {
    const FormulaEntry& e = *hit.entry;
    std::string out = strf("[%s] %s (score %.1f)\n  formula: %s\n", e.id.c_str(), e.name.c_str(),
                           hit.score, e.latex.c_str());
    if (!e.variables.empty()) {
        out += "  variables:";
        for (const auto& [sym, meaning] : e.variables) out += " " + sym + "=" + meaning + ";";
        out += "\n";
    }
    if (!e.notes.empty()) out += "  notes: " + e.notes + "\n";
    return out;
}

}  // namespace wflow::telecom
