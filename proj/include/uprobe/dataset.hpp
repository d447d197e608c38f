#pragma once

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The unlearn-probe Authors

// Corpus ingestion. A corpus is UTF-8 JSONL, one record per line, in one of
// two shapes:
//   {"id": "...", "prefix": "...", "target": "..."}   attacker knowledge given
//   {"id": "...", "text": "..."}                      full passage, split in half
// Unknown fields are ignored; ids must be unique within a file.

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "uprobe/errors.hpp"
#include "uprobe/provider.hpp"
#include "uprobe/types.hpp"

namespace uprobe::dataset {

struct RawRecord {
    std::string id;
    std::optional<std::string> prefix;
    std::optional<std::string> target;
    std::optional<std::string> text;
};

inline std::vector<RawRecord> load_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(errc::io_error, "cannot open corpus file: " + path.string());

    std::vector<RawRecord> records;
    std::set<std::string> seen_ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

        const std::string where = path.filename().string() + ":" + std::to_string(line_no);
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            raise(errc::parse_error, where + ": line is not a JSON object");

        RawRecord r;
        if (!j.contains("id") || !j.at("id").is_string())
            raise(errc::missing_field, where + ": record has no string 'id'");
        r.id = j.at("id").get<std::string>();
        if (!seen_ids.insert(r.id).second)
            raise(errc::duplicate_id, where + ": duplicate record id '" + r.id + "'");

        auto get_str = [&](const char* key) -> std::optional<std::string> {
            if (!j.contains(key)) return std::nullopt;
            if (!j.at(key).is_string())
                raise(errc::parse_error, where + ": field '" + key + "' must be a string");
            return j.at(key).get<std::string>();
        };
        r.prefix = get_str("prefix");
        r.target = get_str("target");
        r.text = get_str("text");

        const bool has_pair = r.prefix.has_value() || r.target.has_value();
        if (has_pair && r.text.has_value())
            raise(errc::parse_error, where + ": record mixes 'text' with 'prefix'/'target'");
        if (has_pair && (!r.prefix.has_value() || !r.target.has_value()))
            raise(errc::missing_field, where + ": prefix/target records need both fields");
        if (!has_pair && !r.text.has_value())
            raise(errc::missing_field, where + ": record needs 'text' or 'prefix'+'target'");

        records.push_back(std::move(r));
    }
    return records;
}

/// Tokenizes a raw record against a provider. Full-text records are split
/// down the middle in token space; prefix/target records tokenize each field
/// directly. The stored texts are the detokenized token sequences, so text
/// and ids always agree under the provider's tokenizer.
inline ExtractionRecord materialize(const RawRecord& raw, const provider::Provider& p) {
    ExtractionRecord rec;
    rec.id = raw.id;

    if (raw.text.has_value()) {
        const std::vector<TokenId> ids = p.tokenize(*raw.text);
        if (ids.size() < 2)
            raise(errc::too_short, "record '" + raw.id + "': passage tokenizes to " +
                                       std::to_string(ids.size()) + " tokens, need >= 2");
        auto [prefix_ids, target_ids] = split_prefix(ids);
        rec.prefix_ids = std::move(prefix_ids);
        rec.target_ids = std::move(target_ids);
    } else {
        rec.prefix_ids = p.tokenize(*raw.prefix);
        rec.target_ids = p.tokenize(*raw.target);
        if (rec.prefix_ids.empty())
            raise(errc::empty_field, "record '" + raw.id + "': prefix tokenizes to nothing");
        if (rec.target_ids.empty())
            raise(errc::empty_field, "record '" + raw.id + "': target tokenizes to nothing");
    }

    rec.prefix_text = p.detokenize(rec.prefix_ids);
    rec.target_text = p.detokenize(rec.target_ids);
    return rec;
}

}  // namespace uprobe::dataset
