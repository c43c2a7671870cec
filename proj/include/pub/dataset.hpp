#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace pub {

/// One user-item event from a review log. Timestamps are Unix seconds.
struct InteractionRecord {
    std::string user_id;
    std::string item_id;
    std::int64_t timestamp = 0;
    double rating = 0.0;  // [1, 5]
    std::string category;
    std::optional<std::string> review_text;
    std::optional<std::string> review_title;
};

struct ItemMetadata {
    std::string item_id;
    std::string title;
    std::string description;
    std::optional<double> price;  // >= 0 when present
    std::string category;
    std::optional<double> average_rating;
};

/// In-memory review-log corpus. `by_user` holds indices into `interactions`,
/// sorted per user by (timestamp, insertion order). An interaction whose item
/// has no entry in `metadata` is treated as metadata-missing; downstream
/// features that need price or title degrade to absent, never to zero.
struct Dataset {
    std::vector<InteractionRecord> interactions;
    std::unordered_map<std::string, ItemMetadata> metadata;
    std::map<std::string, std::vector<std::size_t>> by_user;

    void rebuild_index();

    std::vector<const InteractionRecord*> user_records(const std::string& user_id) const;
    std::vector<std::string> user_ids() const;
    bool has_metadata(const std::string& item_id) const { return metadata.count(item_id) > 0; }
    std::size_t metadata_missing_count() const;

    /// Distinct item ids occurring in `interactions`, sorted.
    std::vector<std::string> item_ids() const;
};

}  // namespace pub
