#include <catch_amalgamated.hpp>

#include <filesystem>

#include "shapereg/maca.hpp"
#include "shapereg/rng.hpp"
#include "shapereg/rule_db.hpp"

using namespace shapereg;

namespace {

BitPattern random_pattern(int n, Rng& rng) {
    BitPattern p(static_cast<std::size_t>(n));
    for (auto& b : p) b = rng.uniform() < 0.5 ? 1 : 0;
    return p;
}

MACAConfig random_config(int n, Rng& rng) {
    MACAConfig cfg;
    cfg.n = n;
    cfg.depth = 4 * n;
    for (int i = 0; i < n; ++i) cfg.rules.push_back(rng.uniform() < 0.5 ? 90 : 150);
    cfg.pef_positions = {0, n / 2, n - 1};
    if (n < 3) cfg.pef_positions = {0};
    return cfg;
}

// Brute-force oracle: march the trajectory, scanning linearly for the first
// state that reappears.
BitPattern oracle_attractor(const BitPattern& p, const MACAConfig& cfg) {
    std::vector<BitPattern> seq = {p};
    BitPattern s = p;
    for (int t = 0; t < cfg.depth; ++t) {
        s = maca_step(s, cfg);
        for (const auto& old : seq)
            if (old == s) return s;
        seq.push_back(s);
    }
    return s;
}

Gene any_gene() {
    Gene g;
    g.feedback[4] = 1.5;
    g.control[4] = 0.25;
    g.bias = -0.75;
    g.dt = 0.5;
    return g;
}

RuleEntry make_entry(const std::string& label, const MACAConfig& cfg,
                     const std::vector<std::uint8_t>& sig) {
    RuleEntry e;
    e.label = label;
    e.gene = any_gene();
    e.config = cfg;
    e.pef_signature = sig;
    return e;
}

} // namespace

TEST_CASE("null pattern is a fixed point with all-zero PEF bits", "[maca]") {
    Rng rng(41);
    for (int trial = 0; trial < 10; ++trial) {
        MACAConfig cfg = random_config(12, rng);
        BitPattern zeros(12, 0);
        AttractorResult res = maca_attractor(zeros, cfg);
        CHECK(res.cycled);
        CHECK(res.representative == zeros);
        for (auto b : extract_pef_bits(res.representative, cfg)) CHECK(b == 0);
    }
}

TEST_CASE("additive rule 90/150 update is linear over XOR", "[maca]") {
    // Exhaustive at n = 8: every pair of states.
    Rng rng(43);
    MACAConfig cfg = random_config(8, rng);
    for (int pa = 0; pa < 256; ++pa)
        for (int pb = 0; pb < 256; ++pb) {
            BitPattern p(8), q(8), x(8);
            for (int i = 0; i < 8; ++i) {
                p[i] = (pa >> i) & 1;
                q[i] = (pb >> i) & 1;
                x[i] = p[i] ^ q[i];
            }
            const BitPattern sp = maca_step(p, cfg);
            const BitPattern sq = maca_step(q, cfg);
            const BitPattern sx = maca_step(x, cfg);
            for (int i = 0; i < 8; ++i) REQUIRE(sx[i] == (sp[i] ^ sq[i]));
        }
}

TEST_CASE("attractor representative matches the exhaustive oracle", "[maca]") {
    // 50 random rule vectors x 20 random patterns at n = 8.
    Rng rng(47);
    for (int rv = 0; rv < 50; ++rv) {
        MACAConfig cfg = random_config(8, rng);
        cfg.depth = 300; // past the 256-state bound, cycles must be found
        for (int pt = 0; pt < 20; ++pt) {
            const BitPattern p = random_pattern(8, rng);
            const AttractorResult res = maca_attractor(p, cfg);
            CHECK(res.cycled);
            CHECK(res.representative == oracle_attractor(p, cfg));
        }
    }
}

TEST_CASE("stored exemplar classifies back to its class", "[maca]") {
    Rng rng(53);
    MACAConfig cfg = random_config(16, rng);
    const BitPattern exemplar = random_pattern(16, rng);
    const AttractorResult att = maca_attractor(exemplar, cfg);

    ShapeRuleDB db;
    db.add(make_entry("building", cfg, extract_pef_bits(att.representative, cfg)));
    ClassifyResult res = maca_classify(exemplar, cfg, db);
    CHECK(res.label == "building");
}

TEST_CASE("unmatched signatures classify as unknown", "[maca]") {
    Rng rng(59);
    MACAConfig cfg = random_config(16, rng);
    const BitPattern exemplar = random_pattern(16, rng);
    const auto bits = extract_pef_bits(maca_attractor(exemplar, cfg).representative, cfg);
    auto flipped = bits;
    flipped[0] ^= 1;
    ShapeRuleDB db;
    db.add(make_entry("road", cfg, flipped));
    CHECK(maca_classify(exemplar, cfg, db).label == "unknown");
}

TEST_CASE("classification is deterministic", "[maca]") {
    Rng rng(61);
    MACAConfig cfg = random_config(24, rng);
    ShapeRuleDB db;
    db.add(make_entry("water", cfg,
                      extract_pef_bits(maca_attractor(random_pattern(24, rng), cfg).representative,
                                       cfg)));
    const BitPattern p = random_pattern(24, rng);
    const ClassifyResult a = maca_classify(p, cfg, db);
    const ClassifyResult b = maca_classify(p, cfg, db);
    CHECK(a.label == b.label);
    CHECK(a.pef_bits == b.pef_bits);
}

TEST_CASE("empty DB is rejected", "[maca]") {
    Rng rng(67);
    MACAConfig cfg = random_config(8, rng);
    ShapeRuleDB db;
    CHECK_THROWS_AS(maca_classify(random_pattern(8, rng), cfg, db), std::invalid_argument);
}

TEST_CASE("config validation rejects bad inputs", "[maca]") {
    MACAConfig cfg = default_maca_config(8, 3);
    CHECK_NOTHROW(cfg.validate());
    MACAConfig bad = cfg;
    bad.rules[2] = 110;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.pef_positions = {0, 0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.pef_positions = {9};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("rule DB store-load round trip preserves the entry", "[rule_db]") {
    Rng rng(71);
    MACAConfig cfg = random_config(10, rng);
    RuleEntry e = make_entry("forest", cfg, {1, 0, 1});
    e.gene.feedback[3] = -0.123456789012345;
    ShapeRuleDB db;
    db.add(e);

    const std::string path = (std::filesystem::temp_directory_path() / "sr_rules.db").string();
    save_rule_db(path, db);
    ShapeRuleDB back = load_rule_db(path);
    REQUIRE(back.size() == 1);
    const RuleEntry* r = back.find("forest");
    REQUIRE(r != nullptr);
    CHECK(r->gene.rule_id() == e.gene.rule_id());
    CHECK(r->config.n == cfg.n);
    CHECK(r->config.rules == cfg.rules);
    CHECK(r->config.pef_positions == cfg.pef_positions);
    CHECK(r->pef_signature == e.pef_signature);
}

TEST_CASE("duplicate labels are rejected", "[rule_db]") {
    Rng rng(73);
    MACAConfig cfg = random_config(6, rng);
    ShapeRuleDB db;
    db.add(make_entry("dup", cfg, {0, 1, 0}));
    CHECK_THROWS_WITH(db.add(make_entry("dup", cfg, {1, 1, 1})),
                      Catch::Matchers::ContainsSubstring("duplicate label"));
}

TEST_CASE("50 random entries re-serialize byte-identically", "[rule_db]") {
    Rng rng(79);
    ShapeRuleDB db;
    for (int i = 0; i < 50; ++i) {
        MACAConfig cfg = random_config(4 + rng.index(20), rng);
        RuleEntry e;
        e.label = "class_" + std::to_string(i);
        for (int k = 0; k < 9; ++k) {
            e.gene.feedback[k] = rng.gaussian(0.0, 1.0);
            e.gene.control[k] = rng.gaussian(0.0, 1.0);
        }
        e.gene.bias = rng.gaussian(0.0, 1.0);
        e.gene.dt = rng.uniform(0.05, 1.0);
        e.config = cfg;
        for (std::size_t k = 0; k < cfg.pef_positions.size(); ++k)
            e.pef_signature.push_back(rng.uniform() < 0.5 ? 1 : 0);
        db.add(e);
    }
    const auto dir = std::filesystem::temp_directory_path();
    const std::string p1 = (dir / "sr_rules_1.db").string();
    const std::string p2 = (dir / "sr_rules_2.db").string();
    save_rule_db(p1, db);
    save_rule_db(p2, load_rule_db(p1));
    std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
    std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(s1 == s2);
    CHECK(!s1.empty());
}

TEST_CASE("malformed DB lines report line and reason", "[rule_db]") {
    const auto dir = std::filesystem::temp_directory_path();
    const std::string path = (dir / "sr_rules_bad.db").string();
    {
        std::ofstream out(path);
        out << "ok_line_missing_fields\tdeadbeef\n";
    }
    CHECK_THROWS_WITH(load_rule_db(path), Catch::Matchers::ContainsSubstring(":1"));
}
