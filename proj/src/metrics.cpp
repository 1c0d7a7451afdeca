#include "geosid/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "geosid/error.hpp"
#include "geosid/format.hpp"

namespace geosid {

namespace {

std::map<Sid, std::vector<std::size_t>> group_by_triple(std::span<const Sid> sids) {
    std::map<Sid, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < sids.size(); ++i) groups[sids[i].triple()].push_back(i);
    return groups;
}

void require_nonempty(std::span<const Sid> sids) {
    if (sids.empty()) fail("EmptyInput", "metric over an empty assignment set");
}

}  // namespace

double icr(std::span<const Sid> sids) {
    require_nonempty(sids);
    std::size_t unique = 0;
    for (const auto& [_, members] : group_by_triple(sids)) {
        if (members.size() == 1) ++unique;
    }
    return static_cast<double>(unique) / static_cast<double>(sids.size());
}

double cur(std::span<const Sid> sids, const LayerCapacities& caps) {
    require_nonempty(sids);
    if (caps.product() == 0) fail("InvalidCapacity", "layer capacities must be positive");
    std::set<Sid> distinct;
    for (const auto& s : sids) distinct.insert(s.triple());
    return static_cast<double>(distinct.size()) / static_cast<double>(caps.product());
}

double nearest_rank_percentile(std::vector<double> values, unsigned percent) {
    if (values.empty()) fail("EmptyInput", "percentile of an empty list");
    if (percent == 0 || percent > 100) fail("InvalidArgument", "percent must be in 1..100");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    const std::size_t rank = (percent * n + 99) / 100;  // ceil(percent * n / 100), integer exact
    return values[std::max<std::size_t>(rank, 1) - 1];
}

Dispersion geo_dispersion(std::span<const Sid> sids, std::span<const GeoPoint> locations, const EarthModel& earth) {
    require_nonempty(sids);
    if (locations.size() != sids.size()) {
        fail("MissingLocation", std::to_string(sids.size()) + " assignments but " +
                                    std::to_string(locations.size()) + " locations");
    }
    std::vector<double> dists(sids.size());
    std::vector<GeoPoint> pts;
    for (const auto& [_, members] : group_by_triple(sids)) {
        pts.clear();
        for (auto i : members) pts.push_back(locations[i]);
        const GeoPoint center = geo_centroid(pts);
        for (auto i : members) dists[i] = haversine_km(center, locations[i], earth);
    }
    Dispersion out;
    double sum = 0.0;
    for (double d : dists) sum += d;
    out.avg_km = sum / static_cast<double>(dists.size());
    out.max_km = *std::max_element(dists.begin(), dists.end());
    out.p90_km = nearest_rank_percentile(dists, 90);
    out.p95_km = nearest_rank_percentile(std::move(dists), 95);
    return out;
}

QuantReport quant_report(std::span<const Sid> sids, std::span<const GeoPoint> locations,
                         const LayerCapacities& caps, const EarthModel& earth) {
    QuantReport r;
    r.cur = cur(sids, caps);
    r.icr = icr(sids);
    const auto disp = geo_dispersion(sids, locations, earth);
    r.avg_dist_km = disp.avg_km;
    r.p90_dist_km = disp.p90_km;
    r.p95_dist_km = disp.p95_km;
    r.group_count = group_by_triple(sids).size();
    r.poi_count = sids.size();
    return r;
}

const std::vector<std::string>& quant_report_columns() {
    static const std::vector<std::string> cols{"CUR", "ICR", "Avg. Dist.", "p90 Dist.", "p95 Dist.", "Groups", "POIs"};
    return cols;
}

std::vector<std::string> quant_report_cells(const QuantReport& r) {
    return {fixed(100.0 * r.cur, 2) + "%",
            fixed(100.0 * r.icr, 2) + "%",
            fixed(r.avg_dist_km, 2),
            fixed(r.p90_dist_km, 2),
            fixed(r.p95_dist_km, 2),
            std::to_string(r.group_count),
            std::to_string(r.poi_count)};
}

bool RankingCase::has_duplicates() const {
    std::set<Sid> seen;
    for (const auto& s : predicted) {
        if (!seen.insert(s.triple()).second) return true;
    }
    return false;
}

std::size_t truth_rank(const RankingCase& c) {
    const Sid t = c.truth.triple();
    for (std::size_t i = 0; i < c.predicted.size(); ++i) {
        if (c.predicted[i].triple() == t) return i + 1;
    }
    return 0;
}

int hit_at_n(const RankingCase& c, std::size_t n) {
    const auto rank = truth_rank(c);
    return rank != 0 && rank <= n ? 1 : 0;
}

double ndcg_at_n(const RankingCase& c, std::size_t n) {
    const auto rank = truth_rank(c);
    if (rank == 0 || rank > n) return 0.0;
    return 1.0 / std::log2(1.0 + static_cast<double>(rank));
}

RankingSummary evaluate_ranking(std::span<const RankingCase> cases, std::size_t n) {
    RankingSummary s;
    s.cases = cases.size();
    if (cases.empty()) return s;
    for (const auto& c : cases) {
        s.hit += hit_at_n(c, n);
        s.ndcg += ndcg_at_n(c, n);
    }
    s.hit /= static_cast<double>(cases.size());
    s.ndcg /= static_cast<double>(cases.size());
    return s;
}

}  // namespace geosid
