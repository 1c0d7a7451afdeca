#include "geosid/sid.hpp"

#include <algorithm>
#include <tuple>

#include "geosid/error.hpp"
#include "geosid/rng.hpp"

namespace geosid {

std::string Sid::to_string() const {
    std::string out = "<" + std::to_string(j1) + "," + std::to_string(j2) + "," + std::to_string(j3);
    if (j4) out += "," + std::to_string(*j4);
    return out + ">";
}

Sid assemble(Code j1, Code j2, Code j3, const LayerCapacities& caps) {
    auto check = [](Code j, std::uint32_t cap, int layer) {
        if (j >= cap) {
            fail("CodeOutOfRange", "layer " + std::to_string(layer) + " code " + std::to_string(j) +
                                       " not below capacity " + std::to_string(cap));
        }
    };
    check(j1, caps.k1, 1);
    check(j2, caps.k2, 2);
    check(j3, caps.k3, 3);
    return {j1, j2, j3, std::nullopt};
}

SidIndex::SidIndex(std::vector<SidEntry> entries) : entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(),
              [](const SidEntry& a, const SidEntry& b) { return a.poi_id < b.poi_id; });
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (i > 0 && entries_[i].poi_id == entries_[i - 1].poi_id) {
            fail("DuplicatePoi", "POI id '" + entries_[i].poi_id + "' appears more than once");
        }
        entries_[i].sid.j4.reset();
        groups_[entries_[i].sid].push_back(i);
    }
}

std::span<const std::size_t> SidIndex::group(const Sid& sid) const {
    const auto it = groups_.find(sid.triple());
    if (it == groups_.end()) return {};
    return it->second;
}

const SidEntry* SidIndex::find(const std::string& poi_id) const {
    const auto it = std::lower_bound(entries_.begin(), entries_.end(), poi_id,
                                     [](const SidEntry& e, const std::string& id) { return e.poi_id < id; });
    if (it == entries_.end() || it->poi_id != poi_id) return nullptr;
    return &*it;
}

std::map<std::string, Sid> hard_code_layer4(const SidIndex& index) {
    std::map<std::string, Sid> out;
    for (const auto& [triple, members] : index.groups()) {
        // members are already in id order
        for (std::size_t ord = 0; ord < members.size(); ++ord) {
            Sid s = triple;
            s.j4 = ord;
            out.emplace(index.entries()[members[ord]].poi_id, s);
        }
    }
    return out;
}

std::vector<std::string> resolve_closest(const SidIndex& index, const Sid& sid, const GeoPoint& user, std::size_t k,
                                         const EarthModel& earth) {
    if (k == 0) fail("InvalidArgument", "k must be at least 1");
    const auto members = index.group(sid);
    if (members.empty()) fail("EmptySidGroup", "no POI carries " + sid.triple().to_string());
    std::vector<std::pair<double, std::size_t>> ranked;
    ranked.reserve(members.size());
    for (auto m : members) ranked.emplace_back(haversine_km(user, index.entries()[m].location, earth), m);
    // Members are in id order, so ordering by (distance, position) is (distance, id).
    std::sort(ranked.begin(), ranked.end());
    const std::size_t take = std::min(k, ranked.size());
    std::vector<std::string> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) out.push_back(index.entries()[ranked[i].second].poi_id);
    return out;
}

std::string resolve_random(const SidIndex& index, const Sid& sid, std::uint64_t seed) {
    const auto members = index.group(sid);
    if (members.empty()) fail("EmptySidGroup", "no POI carries " + sid.triple().to_string());
    Rng rng(seed);
    return index.entries()[members[rng.uniform_index(members.size())]].poi_id;
}

}  // namespace geosid
