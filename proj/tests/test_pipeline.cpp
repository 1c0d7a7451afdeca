#include <doctest.h>

#include <string>

#include <json.hpp>

#include "geosid/error.hpp"
#include "geosid/pipeline.hpp"

using namespace geosid;

namespace {

Corpus small_corpus(std::uint64_t seed = 5) {
    SynthConfig sc;
    sc.n_semantic_clusters = 3;
    sc.pois_per_cluster = 40;
    sc.embedding_dim = 8;
    sc.seed = seed;
    return generate_synthetic(sc);
}

TrainConfig small_cfg() {
    TrainConfig cfg;
    cfg.layer_sizes = {3, 3, 4};
    cfg.seed = 11;
    return cfg;
}

}  // namespace

TEST_CASE("assign_corpus reproduces training SIDs for every configuration") {
    const Corpus corpus = small_corpus();
    for (auto variant : {Variant::pro_geo, Variant::rq_kmeans_euclidean, Variant::cosine_only, Variant::concat_geo,
                         Variant::add_geo}) {
        for (auto rope : {RopeLayer::second, RopeLayer::third, RopeLayer::both}) {
            for (auto frame : {CoordFrame::local, CoordFrame::global}) {
                TrainConfig cfg = small_cfg();
                cfg.variant = variant;
                cfg.rope_layer = rope;
                cfg.coord_frame = frame;
                CAPTURE(cfg.label());
                const auto r = run(corpus, cfg);
                CHECK(r.sids.size() == corpus.size());
                CHECK(assign_corpus(r.artifact, corpus) == r.sids);
                CHECK(assign_corpus(decode_codebook(encode_codebook(r.artifact)), corpus) == r.sids);
                CHECK(assign_corpus(r.artifact, corpus, ExecPolicy::serial) == r.sids);
            }
        }
    }
}

TEST_CASE("geo stage layout follows rope_layer") {
    const Corpus corpus = small_corpus();
    TrainConfig cfg = small_cfg();
    const std::size_t m = corpus.dim();

    cfg.rope_layer = RopeLayer::third;
    auto r = run(corpus, cfg);
    REQUIRE(r.artifact.geo_stages.size() == 1);
    CHECK(r.artifact.geo_stages[0].before_layer == 3);
    CHECK(r.artifact.geo_stages[0].key_depth == 2);
    CHECK(r.artifact.layers[1].dim() == m);
    CHECK(r.artifact.layers[2].dim() == 4 * m);

    cfg.rope_layer = RopeLayer::second;
    r = run(corpus, cfg);
    REQUIRE(r.artifact.geo_stages.size() == 1);
    CHECK(r.artifact.geo_stages[0].before_layer == 2);
    CHECK(r.artifact.geo_stages[0].key_depth == 1);
    CHECK(r.artifact.layers[1].dim() == 4 * m);
    CHECK(r.artifact.layers[2].dim() == 4 * m);

    cfg.rope_layer = RopeLayer::both;
    r = run(corpus, cfg);
    REQUIRE(r.artifact.geo_stages.size() == 2);
    CHECK(r.artifact.layers[2].dim() == 16 * m);

    cfg.coord_frame = CoordFrame::global;
    r = run(corpus, cfg);
    for (const auto& st : r.artifact.geo_stages) {
        CHECK(st.key_depth == 0);
        CHECK(st.anchors.size() == 1);
    }

    cfg = small_cfg();
    cfg.variant = Variant::cosine_only;
    CHECK(run(corpus, cfg).artifact.geo_stages.empty());
}

TEST_CASE("geo anchors are group centroids with the per-group maximum distance") {
    const Corpus corpus = small_corpus();
    const auto r = run(corpus, small_cfg());
    const auto& st = r.artifact.geo_stages.at(0);
    std::map<std::vector<Code>, std::vector<GeoPoint>> groups;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        groups[{r.sids[i].j1, r.sids[i].j2}].push_back(corpus.pois[i].location);
    }
    CHECK(st.anchors.size() == groups.size());
    for (const auto& [key, pts] : groups) {
        const auto& a = st.anchors.at(key);
        CHECK(a.center == geo_centroid(pts));
        double max_d = 0.0;
        for (const auto& p : pts) max_d = std::max(max_d, haversine_km(a.center, p));
        CHECK(a.d_scale_km == (max_d > 0.0 ? max_d : 1.0));
    }
    CHECK(st.lookup({99, 99}) == st.fallback);

    TrainConfig fixed = small_cfg();
    fixed.d_scale_km = 12.5;
    for (const auto& [key, a] : run(corpus, fixed).artifact.geo_stages.at(0).anchors) CHECK(a.d_scale_km == 12.5);
}

TEST_CASE("run is deterministic") {
    const Corpus corpus = small_corpus();
    const auto a = run(corpus, small_cfg());
    const auto b = run(corpus, small_cfg(), ExecPolicy::serial);
    CHECK(a.artifact == b.artifact);
    CHECK(encode_codebook(a.artifact) == encode_codebook(b.artifact));
    CHECK(a.sids == b.sids);
    CHECK(a.report == b.report);
}

TEST_CASE("variant none is plain three-layer cosine residual k-means") {
    const Corpus corpus = small_corpus();
    TrainConfig cfg = small_cfg();
    cfg.variant = Variant::cosine_only;
    const auto r = run(corpus, cfg);
    const KMeansOptions opts{cfg.max_iters, cfg.tol, ExecPolicy::parallel};
    const auto l1 = fit_layer(corpus.ordered_embeddings(), 3, Metric::cosine, layer_seed(cfg.seed, 0), opts);
    const auto l2 = fit_layer(l1.residual, 3, Metric::cosine, layer_seed(cfg.seed, 1), opts);
    const auto l3 = fit_layer(l2.residual, 4, Metric::cosine, layer_seed(cfg.seed, 2), opts);
    CHECK(r.artifact.layers[0] == l1.layer);
    CHECK(r.artifact.layers[1] == l2.layer);
    CHECK(r.artifact.layers[2] == l3.layer);
    for (std::size_t i = 0; i < corpus.size(); ++i) CHECK(r.sids[i] == Sid{l1.codes[i], l2.codes[i], l3.codes[i]});
}

TEST_CASE("with rope at the third layer, layers 1-2 do not depend on the variant") {
    const Corpus corpus = small_corpus();
    TrainConfig base = small_cfg();
    base.variant = Variant::cosine_only;
    const auto ref = run(corpus, base);
    for (auto v : {Variant::pro_geo, Variant::concat_geo, Variant::add_geo}) {
        TrainConfig cfg = base;
        cfg.variant = v;
        const auto r = run(corpus, cfg);
        CHECK(r.artifact.layers[0] == ref.artifact.layers[0]);
        CHECK(r.artifact.layers[1] == ref.artifact.layers[1]);
    }
}

TEST_CASE("zero alpha and beta only mirror-duplicate the residual") {
    const Corpus corpus = small_corpus();
    TrainConfig cfg = small_cfg();
    cfg.alpha = 0.0;
    cfg.beta = 0.0;
    const auto h = train_hierarchy(corpus.ordered_embeddings(), cfg);
    std::vector<std::vector<Code>> keys;
    for (std::size_t i = 0; i < corpus.size(); ++i) keys.push_back({h.j1[i], h.j2[i]});
    const auto locs = corpus.locations();
    const auto st = fit_geo_stage(locs, keys, 3, cfg, nullptr);
    const auto enhanced = enhance(h.residual2, locs, keys, st, cfg);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto r = h.residual2.row(i);
        const auto e = enhanced.row(i);
        for (std::size_t c = 0; c < 4; ++c) {
            for (std::size_t t = 0; t < r.size(); ++t) CHECK(e[c * r.size() + t] == r[t]);
        }
    }
}

TEST_CASE("compare and sweeps") {
    const Corpus corpus = small_corpus();
    const TrainConfig cfg = small_cfg();
    const auto dup = compare(corpus, {cfg, cfg});
    REQUIRE(dup.size() == 2);
    CHECK(dup[0].report == dup[1].report);

    const auto grid = sweep_alpha_beta(corpus, default_sweep_grid(), cfg);
    REQUIRE(grid.size() == 8);
    CHECK(grid[0].label == "(0,0)");
    CHECK(grid[4].label == "(0.5,0.5)");
    CHECK(grid[4].report == run(corpus, cfg).report);
    CHECK_THROWS_AS(sweep_alpha_beta(corpus, {}, cfg), Error);
    CHECK_THROWS_AS(sweep_alpha_beta(corpus, {{-1.0, 0.0}}, cfg), Error);

    const auto attrs = sweep_attributes(corpus, cfg);
    REQUIRE(attrs.size() == 8);
    CHECK(attrs[0].label == "w/ R(d+)");
    CHECK(attrs[7].label == "w/ R(s+,s-,d+,d-)");
}

TEST_CASE("report formatting") {
    const Corpus corpus = small_corpus();
    const auto rows = compare(corpus, {small_cfg(), TrainConfig{.layer_sizes = {3, 3, 4}, .variant = Variant::rq_kmeans_euclidean}});
    const auto table = format_table(rows);
    CHECK(table.find("CUR") != std::string::npos);
    CHECK(table.find("p95 Dist.") != std::string::npos);
    CHECK(table.find("rq_kmeans_euclidean") != std::string::npos);
    const auto records = format_records(rows);
    std::size_t lines = 0;
    std::size_t start = 0;
    while ((start = records.find('\n', start)) != std::string::npos) {
        ++lines;
        ++start;
    }
    CHECK(lines == 2);
    const auto first = nlohmann::json::parse(records.substr(0, records.find('\n')));
    CHECK(first["poi_count"] == corpus.size());
    CHECK(first["avg_dist_km"].get<double>() == rows[0].report.avg_dist_km);
}

TEST_CASE("run errors carry the stage") {
    const Corpus corpus = small_corpus();
    TrainConfig cfg = small_cfg();
    cfg.layer_sizes = {3, 3, 1000};
    try {
        run(corpus, cfg);
        FAIL("expected InvalidK");
    } catch (const Error& e) {
        CHECK(e.code() == "InvalidK");
        CHECK(std::string(e.what()).find("layer 3") != std::string::npos);
    }
    cfg.layer_sizes = {3, 3};
    CHECK_THROWS_AS(run(corpus, cfg), Error);
}

TEST_CASE("wide longitude groups raise a warning") {
    Corpus c;
    c.pois = {{"a", {0, 179.0}, 0, std::nullopt}, {"b", {0, -179.0}, 1, std::nullopt}};
    c.embeddings = Matrix(2, 2, std::vector<double>{1, 0.1, 1, -0.1});
    TrainConfig cfg;
    cfg.layer_sizes = {1, 1, 1};
    const auto r = run(c, cfg);
    REQUIRE_FALSE(r.warnings.empty());
    CHECK(r.warnings[0].find("180 degrees") != std::string::npos);
}
