#include "pub/dataset.hpp"

#include <algorithm>
#include <set>

namespace pub {

void Dataset::rebuild_index() {
    by_user.clear();
    for (std::size_t i = 0; i < interactions.size(); ++i) {
        by_user[interactions[i].user_id].push_back(i);
    }
    for (auto& [user, idx] : by_user) {
        std::stable_sort(idx.begin(), idx.end(), [this](std::size_t a, std::size_t b) {
            return interactions[a].timestamp < interactions[b].timestamp;
        });
    }
}

std::vector<const InteractionRecord*> Dataset::user_records(const std::string& user_id) const {
    std::vector<const InteractionRecord*> out;
    auto it = by_user.find(user_id);
    if (it == by_user.end()) return out;
    out.reserve(it->second.size());
    for (std::size_t i : it->second) out.push_back(&interactions[i]);
    return out;
}

std::vector<std::string> Dataset::user_ids() const {
    std::vector<std::string> out;
    out.reserve(by_user.size());
    for (const auto& [user, idx] : by_user) out.push_back(user);
    return out;
}

std::size_t Dataset::metadata_missing_count() const {
    std::set<std::string> missing;
    for (const auto& r : interactions) {
        if (!has_metadata(r.item_id)) missing.insert(r.item_id);
    }
    return missing.size();
}

std::vector<std::string> Dataset::item_ids() const {
    std::set<std::string> ids;
    for (const auto& r : interactions) ids.insert(r.item_id);
    return std::vector<std::string>(ids.begin(), ids.end());
}

}  // namespace pub
