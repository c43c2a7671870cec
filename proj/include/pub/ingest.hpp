#pragma once

#include <istream>
#include <utility>

#include "pub/dataset.hpp"
#include "pub/io.hpp"

namespace pub {

struct ParseStats {
    std::size_t lines = 0;
    std::size_t parsed = 0;
    std::size_t malformed = 0;       // skipped with a diagnostic count, never fatal
    std::size_t ms_timestamps = 0;   // lines whose timestamp arrived in milliseconds
};

/// Parses line-delimited review objects. Fields: `user_id`, `parent_asin` or
/// `item_id`, `rating`, `timestamp` (auto-detects ms vs s: values > 10^11 are
/// milliseconds), optional `text`, `title` and `category`. Records without an
/// inline category get `default_category`. Malformed lines are counted and
/// skipped.
std::vector<InteractionRecord> parse_interactions(std::istream& in,
                                                  const std::string& default_category,
                                                  ParseStats* stats = nullptr);

/// Parses item metadata JSONL (`parent_asin`/`item_id`, `title`, `description`,
/// `price`, `main_category`/`category`, `average_rating`). Prices may be
/// numbers or "$12.99"-style strings; anything unparseable or negative is
/// treated as absent.
std::unordered_map<std::string, ItemMetadata> parse_metadata(std::istream& in,
                                                             ParseStats* stats = nullptr);

struct UnifyStats {
    std::size_t duplicates = 0;  // identical (user, item, timestamp) triples dropped
};

/// Merges category-specific parts into one dataset. Records that carry no
/// category are stamped with their part's label. Duplicate (user, item,
/// timestamp) triples across parts are kept once, first part wins.
Dataset unify_categories(const std::vector<std::pair<std::string, Dataset>>& parts,
                         UnifyStats* stats = nullptr);

/// Iterative k-core: repeatedly drops interactions of users or items with
/// fewer than `min_count` interactions until a fixed point. May return an
/// empty dataset. Metadata is kept whole (it is the catalogue).
Dataset filter_k_core(const Dataset& d, std::size_t min_count);

struct SplitResult {
    Dataset train;
    Dataset test;
    /// Users whose timestamps were all equal, split by stable input order.
    std::vector<std::string> stable_order_users;
};

/// Per-user chronological split. The earliest ceil((1-f)*n) interactions go to
/// train, capped at n-1 so the test side is never empty. Requires every user
/// to have at least 2 interactions.
SplitResult chronological_split(const Dataset& d, double test_fraction);

// Canonical JSONL schema (round-trips through parse_interactions /
// parse_metadata).
json record_to_json(const InteractionRecord& r);
InteractionRecord record_from_json(const json& j);
json metadata_to_json(const ItemMetadata& m);
std::string serialize_interactions(const std::vector<InteractionRecord>& records);
std::string serialize_metadata(const std::unordered_map<std::string, ItemMetadata>& metadata);

}  // namespace pub
