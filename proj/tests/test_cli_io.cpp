#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"
#include "treealg/cli.hpp"
#include "treealg/error.hpp"
#include "treealg/io.hpp"
#include "treealg/measures.hpp"
#include "treealg/oracle.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <thread>

using namespace treealg;
using namespace fixtures;
namespace fs = std::filesystem;

namespace {

const fs::path kData = TEST_DATA_DIR;

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

/** Fresh scratch directory per test case. */
struct Scratch {
    fs::path dir;
    Scratch() {
        dir = fs::temp_directory_path() / ("treealg_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(dir);
    }
    ~Scratch() {
        std::error_code ec;
        fs::remove_all(dir, ec);
    }
    std::string path(const std::string& name) const { return (dir / name).string(); }
};

const char* kStump4Json =
    R"({"schema": {"features":[{"name":"x1","kind":"numeric","low":0,"high":10}, {"name":"c","kind":"categorical","levels":["a","b"]}], "class_labels": null}, "nodes":[{"id":0,"split":{"type":"numeric","feature":0,"threshold":4.0},"left":1,"right":2}, {"id":1,"value":{"type":"scalar","v":0.0}}, {"id":2,"value":{"type":"scalar","v":1.0}}], "root":0})";

ForestFile fuzz_file(std::uint64_t seed, std::size_t n, const FuzzOptions& opt, std::size_t classes = 0) {
    std::mt19937_64 rng(seed);
    ForestFile f;
    f.schema = random_schema(3, 2, rng, classes);
    for (std::size_t i = 0; i < n; ++i) f.trees.push_back(random_tree(f.schema, opt, rng));
    f.metadata["source"] = "fuzzer";
    return f;
}

} // namespace

TEST_CASE("documented Stump4 JSON loads as a one-tree forest") {
    ForestFile f = forest_from_json(kStump4Json);
    REQUIRE(f.trees.size() == 1);
    CHECK(validate(f.trees[0]).empty());
    CHECK(scalar_at(f.trees[0], {4, 1}) == 0.0);
    CHECK(scalar_at(f.trees[0], {4.5, 0}) == 1.0);
    CHECK((*f.schema)[1].categorical().levels == std::vector<std::string>{"a", "b"});
}

TEST_CASE("JSON round trip is byte-identical") {
    std::vector<ForestFile> files;
    FuzzOptions scalar_opt;
    files.push_back(fuzz_file(1, 5, scalar_opt));
    FuzzOptions hyper;
    hyper.hyperplane_probability = 0.3;
    files.push_back(fuzz_file(2, 5, hyper));
    FuzzOptions probs;
    probs.kind = ValueKind::ClassProbs;
    files.push_back(fuzz_file(3, 5, probs, 3));
    Scratch tmp;
    for (const ForestFile& f : files) {
        std::string text = forest_to_json(f);
        ForestFile back = forest_from_json(text);
        CHECK(forest_to_json(back) == text);
        REQUIRE(back.trees.size() == f.trees.size());
        for (std::size_t i = 0; i < f.trees.size(); ++i) CHECK(back.trees[i] == f.trees[i]);
        CHECK(back.metadata == f.metadata);
        save_forest(f, tmp.path("a.json"));
        save_forest(load_forest(tmp.path("a.json")), tmp.path("b.json"));
        CHECK(read_file(tmp.path("a.json")) == read_file(tmp.path("b.json")));
    }
    // Tuple leaves survive as well.
    CombineBudget budget;
    Tree c = combine_pair(stump4(), stumpy5(), budget);
    CHECK(tree_from_json(tree_to_json(c)) == c);
    // Awkward doubles are written losslessly.
    Tree odd = stump(d2(), 0, 0.1 + 0.2, 1.0 / 3.0, -2.5e-300);
    CHECK(tree_from_json(tree_to_json(odd)) == odd);
}

TEST_CASE("load errors name their location") {
    SUBCASE("probabilities that do not sum to one") {
        const char* doc = R"({"schema": {"features": [{"name": "x", "kind": "numeric", "low": 0, "high": 1}],
            "class_labels": ["a", "b"]},
          "trees": [{"nodes": [
            {"id": 0, "split": {"type": "numeric", "feature": 0, "threshold": 0.5}, "left": 1, "right": 2},
            {"id": 1, "value": {"type": "probs", "p": [1, 0]}},
            {"id": 2, "split": {"type": "numeric", "feature": 0, "threshold": 0.75}, "left": 3, "right": 4},
            {"id": 3, "value": {"type": "probs", "p": [0.5, 0.3]}},
            {"id": 4, "value": {"type": "probs", "p": [0, 1]}}], "root": 0}]})";
        try {
            forest_from_json(doc);
            FAIL("expected a validation error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::Validation);
            CHECK(std::string(e.what()) == "probabilities sum 0.8 ≠ 1 at tree 0 node 3");
        }
    }
    SUBCASE("malformed JSON") {
        try {
            forest_from_json("{\n  \"schema\": {\n    \"features\": [,]\n}");
            FAIL("expected a parse error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::Parse);
            CHECK(std::string(e.what()).find("line 3") != std::string::npos);
            CHECK(std::string(e.what()).find("column") != std::string::npos);
        }
    }
    SUBCASE("schema mismatch across trees") {
        std::string doc = forest_to_json(ForestFile{d2(), {stump4()}, {}});
        auto j = doc.find("\"trees\": [");
        REQUIRE(j != std::string::npos);
        doc.insert(j + 10, R"({"schema": {"features": [{"name": "z", "kind": "numeric", "low": 0, "high": 1}], "class_labels": null},
            "nodes": [{"id": 0, "value": {"type": "scalar", "v": 1}}], "root": 0},)");
        try {
            forest_from_json(doc);
            FAIL("expected a schema mismatch");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::SchemaMismatch);
        }
    }
    SUBCASE("missing fields and bad ids") {
        CHECK_THROWS_AS(forest_from_json(R"({"nodes": [], "root": 0})"), Error);
        std::string dup = tree_to_json(stump4());
        dup.replace(dup.find("\"id\": 2"), 7, "\"id\": 1");
        CHECK_THROWS_AS(forest_from_json(dup), Error);
    }
}

TEST_CASE("flat-table import") {
    const std::string stump4_table =
        "tree_id,node_id,parent_id,is_left_child,split_feature,split_threshold_or_levels,leaf_value\n"
        "0,10,,,x1,4,\n"
        "0,11,10,1,,,0\n"
        "0,12,10,0,,,1\n";
    ForestFile f = import_flat_table(stump4_table, d2());
    REQUIRE(f.trees.size() == 1);
    CombineBudget budget;
    Tree c = combine_pair(f.trees[0], stump4(), budget);
    std::array<Tree, 2> originals{f.trees[0], stump4()};
    CHECK_FALSE(pointwise_equivalence(c, originals, 5000, 1).has_value());
    CHECK(f.trees[0] == stump4());

    auto expect_error = [&](const std::string& table, const std::string& needle) {
        try {
            import_flat_table(table, d2());
            FAIL("expected an import error");
        } catch (const Error& e) {
            CHECK_MESSAGE(std::string(e.what()).find(needle) != std::string::npos, e.what());
        }
    };
    expect_error("tree_id,node_id,parent_id,is_left_child,split_feature,split_threshold_or_levels,leaf_value\n"
                 "0,0,,,x1,4,\n0,1,0,1,,,0\n0,2,0,0,,,1\n0,7,5,1,,,1\n",
                 "orphan node at tree_id=0 node_id=7");
    expect_error("tree_id,node_id,parent_id,is_left_child,split_feature,split_threshold_or_levels,leaf_value,surrogate_feature\n"
                 "0,0,,,x1,4,,x2\n0,1,0,1,,,0,\n0,2,0,0,,,1,\n",
                 "unsupported construct 'surrogate_feature'");
    expect_error("tree_id,node_id,parent_id,is_left_child,split_feature,split_threshold_or_levels,leaf_value\n"
                 "0,0,,,x1,NA,\n0,1,0,1,,,0\n0,2,0,0,,,1\n",
                 "missing-value");
    expect_error("tree_id,node_id,parent_id,is_left_child,split_feature,split_threshold_or_levels,leaf_value\n"
                 "0,0,,,x9,4,\n0,1,0,1,,,0\n0,2,0,0,,,1\n",
                 "unknown feature 'x9'");
    expect_error("tree_id,node_id,parent_id,is_left_child,split_feature\n0,0,,,\n", "lacks column");

    Scratch tmp;
    write_file_atomic(tmp.path("t.csv"), stump4_table);
    CHECK_THROWS_AS(import_external_forest(tmp.path("t.csv"), "xgboost-json", d2()), Error);
    CHECK(import_external_forest(tmp.path("t.csv"), "flat-table", d2()).trees.size() == 1);
}

TEST_CASE("flat-table categorical splits and class labels") {
    auto schema = std::make_shared<const FeatureSchema>(
        std::vector<Feature>{{"x", NumericRange{0, 1}}, {"c", CategoricalLevels{{"red", "green", "blue"}}}},
        std::vector<std::string>{"yes", "no"});
    const std::string table =
        "tree_id,node_id,parent_id,is_left_child,split_feature,split_threshold_or_levels,leaf_value\n"
        "3,0,,,c,red|blue,\n"
        "3,1,0,1,,,yes\n"
        "3,2,0,0,,,0.25|0.75\n";
    ForestFile f = import_flat_table(table, schema);
    REQUIRE(f.trees.size() == 1);
    CHECK(std::get<ClassProbs>(evaluate(f.trees[0], {0.5, 2})).probs == std::vector<double>{1, 0});
    CHECK(std::get<ClassProbs>(evaluate(f.trees[0], {0.5, 1})).probs == std::vector<double>{0.25, 0.75});
    CHECK(import_flat_table(export_flat_table(f), schema).trees[0] == f.trees[0]);
}

TEST_CASE("50-tree flat-table export loads and feeds dist-matrix") {
    FuzzOptions opt;
    opt.max_depth = 4;
    opt.max_nodes = 31;
    ForestFile f = fuzz_file(8, 50, opt);
    Scratch tmp;
    write_file_atomic(tmp.path("forest.csv"), export_flat_table(f));
    write_file_atomic(tmp.path("schema.json"), schema_to_json(*f.schema));
    CliResult r = cli({"import", "--in", tmp.path("forest.csv"), "--schema", tmp.path("schema.json"), "--out",
                       tmp.path("forest.json")});
    REQUIRE(r.code == 0);
    ForestFile back = load_forest(tmp.path("forest.json"));
    REQUIRE(back.trees.size() == 50);
    for (std::size_t i = 0; i < 50; ++i) {
        std::array<Tree, 2> pair{back.trees[i], f.trees[i]};
        CombineBudget budget;
        CHECK_FALSE(pointwise_equivalence(combine_pair(pair[0], pair[1], budget), pair, 500, i).has_value());
    }
    r = cli({"dist-matrix", "--forest", tmp.path("forest.json"), "--out", tmp.path("D.csv")});
    CHECK(r.code == 0);
    Eigen::MatrixXd d = read_matrix_csv(tmp.path("D.csv"));
    CHECK(d.rows() == 50);
    CHECK(d.cols() == 50);
    CHECK(d == d.transpose());
}

TEST_CASE("CLI examples") {
    const std::string s4 = (kData / "stump4.json").string();
    const std::string s6 = (kData / "stump6.json").string();
    const std::string c7 = (kData / "const7.json").string();

    CliResult d = cli({"dist", "--a", s4, "--b", s6, "--measure", "uniform"});
    CHECK(d.code == 0);
    CHECK(d.out == "0.447213595\n");

    CliResult c = cli({"corr", "--a", s4, "--b", c7});
    CHECK(c.code == 2);
    CHECK(c.err == "code=DEGENERATE_CORRELATION msg=\"degenerate correlation: zero variance in b\"\n");

    Scratch tmp;
    CliResult comb = cli({"combine", "--forest", (kData / "three_stumps.json").string(), "--weights",
                          (kData / "w.csv").string(), "--out", tmp.path("c.json")});
    CHECK(comb.code == 0);
    CliResult v = cli({"validate", tmp.path("c.json")});
    CHECK(v.code == 0);
    Tree combined = load_forest(tmp.path("c.json")).trees.at(0);
    CHECK(scalar_at(combined, {5, 7}) == 0.5 * 1 + 0.25 * 0 + 0.25 * 1);

    CliResult aff = cli({"affine", "--forest", (kData / "three_stumps.json").string(), "--weights",
                         (kData / "w.csv").string(), "--out", tmp.path("a.json"), "--simplify"});
    CHECK(aff.code == 0);

    CliResult fd = cli({"forest-dist", "--f", (kData / "three_stumps.json").string(), "--g", s4});
    CHECK(fd.code == 0);
}

TEST_CASE("CLI empirical measure") {
    Scratch tmp;
    write_file_atomic(tmp.path("pts.csv"), "x1,x2\n1,0\n5,0\n9,0\n");
    write_file_atomic(tmp.path("w.csv"), "0.5,0.25,0.25\n");
    const std::string s4 = (kData / "stump4.json").string();
    const std::string s6 = (kData / "stump6.json").string();
    CliResult r = cli({"dist", "--a", s4, "--b", s6, "--measure", "empirical", "--data", tmp.path("pts.csv"),
                       "--weights", tmp.path("w.csv")});
    CHECK(r.code == 0);
    CHECK(r.out == "0.5\n");
    CHECK(cli({"dist", "--a", s4, "--b", s6, "--measure", "empirical"}).code == 1);
}

TEST_CASE("CLI usage errors and help") {
    CliResult r = cli({"dist", "--bogus"});
    CHECK(r.code == 1);
    CHECK(r.err.rfind("code=USAGE msg=", 0) == 0);
    CHECK(r.err.find("Usage:") != std::string::npos);
    CHECK(cli({}).code == 1);
    CHECK(cli({"frobnicate"}).code == 1);
    CHECK(cli({"mds", "--matrix", "/nonexistent/D.csv", "--out", "x.csv"}).code == 1);

    CliResult help = cli({"--help-all"});
    CHECK(help.code == 0);
    std::string golden = read_file(fs::path(TEST_DATA_DIR) / ".." / "golden" / "help_all.txt");
    CHECK(help.out == golden);
    for (const char* flag : {"--forest", "--out", "--weights", "--simplify", "--max-nodes", "--a", "--b", "--measure",
                             "--data", "--jobs", "--f", "--g", "--matrix", "--dims", "--svg", "--samples", "--seed",
                             "--dialect", "--in", "--schema"})
        CHECK(help.out.find(flag) != std::string::npos);
}

TEST_CASE("CLI computation errors") {
    Scratch tmp;
    FuzzOptions opt;
    opt.max_nodes = 61;
    ForestFile f = fuzz_file(12, 2, opt);
    save_tree(f.trees[0], tmp.path("a.json"));
    save_tree(f.trees[1], tmp.path("b.json"));
    CliResult r = cli({"dist", "--a", tmp.path("a.json"), "--b", tmp.path("b.json"), "--max-nodes", "3"});
    CHECK(r.code == 2);
    CHECK(r.err.rfind("code=BUDGET_EXCEEDED msg=", 0) == 0);
    CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);

    write_file_atomic(tmp.path("bad.json"), "{ not json");
    r = cli({"validate", tmp.path("bad.json")});
    CHECK(r.code == 2);
    CHECK(r.err.rfind("code=PARSE", 0) == 0);

    std::vector<Node> nodes = stump4().nodes();
    nodes[2].value.reset();
    save_tree(Tree(d2(), nodes, 0), tmp.path("hole.json"));
    r = cli({"validate", tmp.path("hole.json")});
    CHECK(r.code == 2);
    CHECK(r.out.find("leaf without value at tree 0 node 2") != std::string::npos);

    TreeBuilder b(d2());
    auto [l, rr] = b.split(0, HyperplaneSplit{{1, 1}, 10});
    b.set_value(l, Scalar{0});
    b.set_value(rr, Scalar{1});
    save_tree(std::move(b).build(), tmp.path("h.json"));
    r = cli({"dist", "--a", tmp.path("h.json"), "--b", (kData / "stump4.json").string()});
    CHECK(r.code == 2);
    CHECK(r.err.rfind("code=UNSUPPORTED_GEOMETRY", 0) == 0);
}

TEST_CASE("mds subcommand writes coordinates and a plot") {
    Scratch tmp;
    write_file_atomic(tmp.path("D.csv"), "0,3,4\n3,0,5\n4,5,0\n");
    CliResult r = cli({"mds", "--matrix", tmp.path("D.csv"), "--dims", "2", "--out", tmp.path("X.csv"), "--svg",
                       tmp.path("X.svg")});
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("stress=", 0) == 0);
    CHECK(r.out.find("effective_dims=2") != std::string::npos);
    Eigen::MatrixXd x = read_matrix_csv(tmp.path("X.csv"));
    CHECK(x.rows() == 3);
    CHECK((x.row(0) - x.row(2)).norm() == doctest::Approx(4.0).epsilon(1e-9));
    std::string svg = read_file(tmp.path("X.svg"));
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(std::count(svg.begin(), svg.end(), 'c') > 3);
}

TEST_CASE("CLI output is reproducible and honours TREEALG_SEED") {
    const std::string forest = (kData / "three_stumps.json").string();
    CliResult a = cli({"oracle-check", "--forest", forest, "--samples", "2000", "--seed", "5"});
    CliResult b = cli({"oracle-check", "--forest", forest, "--samples", "2000", "--seed", "5"});
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.find("max_grid_delta=") != std::string::npos);
    ::setenv("TREEALG_SEED", "5", 1);
    CliResult env = cli({"oracle-check", "--forest", forest, "--samples", "2000"});
    ::unsetenv("TREEALG_SEED");
    CHECK(env.out == a.out);
    CliResult other = cli({"oracle-check", "--forest", forest, "--samples", "2000", "--seed", "6"});
    CHECK(other.out != a.out);

    Scratch tmp;
    cli({"dist-matrix", "--forest", forest, "--out", tmp.path("D1.csv"), "--jobs", "1"});
    cli({"dist-matrix", "--forest", forest, "--out", tmp.path("D3.csv"), "--jobs", "3"});
    CHECK(read_file(tmp.path("D1.csv")) == read_file(tmp.path("D3.csv")));
}

TEST_CASE("atomic writes") {
    Scratch tmp;
    const std::string target = tmp.path("out.txt");
    write_file_atomic(target, "old");
    CHECK(read_file(target) == "old");
    CHECK_THROWS_AS(write_file_atomic(tmp.path("missing/out.txt"), "x"), Error);

    // A reader never observes a partially written file while writers replace it.
    const std::string big_a(1 << 20, 'a');
    const std::string big_b(1 << 20, 'b');
    write_file_atomic(target, big_a);
    std::atomic<bool> done{false};
    std::atomic<int> torn{0};
    std::thread reader([&] {
        while (!done) {
            std::string s = read_file(target);
            if (s != big_a && s != big_b) ++torn;
        }
    });
    for (int i = 0; i < 40; ++i) write_file_atomic(target, i % 2 ? big_a : big_b);
    done = true;
    reader.join();
    CHECK(torn == 0);
    std::size_t files = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(tmp.dir)) ++files;
    CHECK(files == 1);
}

TEST_CASE("csv helpers") {
    Scratch tmp;
    Eigen::MatrixXd m(2, 2);
    m << 0.1, 1.0 / 3.0, -2e-310, 5;
    write_file_atomic(tmp.path("m.csv"), matrix_to_csv(m));
    CHECK(read_matrix_csv(tmp.path("m.csv")) == m);
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1e21) == "1e+21");
    write_file_atomic(tmp.path("ragged.csv"), "1,2\n3\n");
    CHECK_THROWS_AS(read_matrix_csv(tmp.path("ragged.csv")), Error);

    auto schema = std::make_shared<const FeatureSchema>(
        std::vector<Feature>{{"x", NumericRange{0, 1}}, {"c", CategoricalLevels{{"a", "b"}}}});
    write_file_atomic(tmp.path("p.csv"), "0.5,b\n0.25,a\n");
    auto pts = read_points_csv(tmp.path("p.csv"), *schema);
    CHECK(pts == std::vector<Point>{{0.5, 1}, {0.25, 0}});
    write_file_atomic(tmp.path("q.csv"), "0.5,z\n");
    CHECK_THROWS_AS(read_points_csv(tmp.path("q.csv"), *schema), Error);
}
