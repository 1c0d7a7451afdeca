// Geographic separation examples on the synthetic geo-split corpus. Kept out
// of the unit target: on this corpus the geo stage only rescales residual
// similarity, so these checks are expected to fail (see README).

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "geosid/data_io.hpp"
#include "geosid/georope.hpp"
#include "geosid/pipeline.hpp"

using namespace geosid;

namespace {

TrainConfig cfg_for(std::vector<std::uint32_t> k, std::uint64_t seed, Variant v) {
    TrainConfig cfg;
    cfg.layer_sizes = std::move(k);
    cfg.seed = seed;
    cfg.variant = v;
    return cfg;
}

}  // namespace

TEST_CASE("one semantic cluster, two blobs: pro_geo k=[1,1,2] splits the blobs in j3") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        CAPTURE(seed);
        SynthConfig sc;
        sc.n_semantic_clusters = 1;
        sc.geo_subclusters_per_semantic = 2;
        sc.seed = seed;
        const Corpus corpus = generate_synthetic(sc);
        const auto blobs = synthetic_blob_labels(sc);
        const auto res = run(corpus, cfg_for({1, 1, 2}, seed, Variant::pro_geo));
        std::set<std::pair<std::uint32_t, Code>> pairs;
        for (std::size_t i = 0; i < res.sids.size(); ++i) pairs.insert({blobs[i], res.sids[i].j3});
        CHECK(pairs.size() == 2);
    }
}

TEST_CASE("compare: pro_geo has strictly lower avg_dist_km than Euclidean RQ-Kmeans") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        CAPTURE(seed);
        SynthConfig sc;
        sc.seed = seed;
        const Corpus corpus = generate_synthetic(sc);
        const auto rows = compare(corpus, {cfg_for({4, 4, 8}, seed, Variant::pro_geo),
                                           cfg_for({4, 4, 8}, seed, Variant::rq_kmeans_euclidean)});
        CHECK(rows[0].report.avg_dist_km < rows[1].report.avg_dist_km);
    }
}

TEST_CASE("attribute rows never increase avg_dist_km over the no-geo variant") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        SynthConfig sc;
        sc.seed = seed;
        const Corpus corpus = generate_synthetic(sc);
        const double none = run(corpus, cfg_for({4, 4, 8}, seed, Variant::cosine_only)).report.avg_dist_km;
        for (const auto& row : sweep_attributes(corpus, cfg_for({4, 4, 8}, seed, Variant::pro_geo))) {
            CAPTURE(seed);
            CAPTURE(row.label);
            CHECK(row.report.avg_dist_km <= none);
        }
    }
}
