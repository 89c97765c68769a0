#include "treealg/cli.hpp"

#include "treealg/combine.hpp"
#include "treealg/error.hpp"
#include "treealg/io.hpp"
#include "treealg/mds.hpp"
#include "treealg/measures.hpp"
#include "treealg/oracle.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ostream>

namespace treealg {

namespace {

/** Command-line misuse detected after parsing; exits like a parse error. */
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt9(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

std::string fmt3(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') {
            out += '\\';
            out += c;
        } else if (c == '\n') {
            out += "\\n";
        } else {
            out += c;
        }
    }
    return out;
}

void diagnose(std::ostream& err, std::string_view code, const std::string& msg) {
    err << "code=" << code << " msg=\"" << escape(msg) << "\"\n";
}

struct MeasureArgs {
    std::string kind = "uniform";
    std::string data;
    std::string weights;

    void attach(CLI::App* sub) {
        sub->add_option("--measure", kind, "Integration measure")
            ->check(CLI::IsMember({"uniform", "empirical"}))
            ->capture_default_str();
        sub->add_option("--data", data, "Points CSV for the empirical measure (feature order, level names)")
            ->check(CLI::ExistingFile);
        sub->add_option("--weights", weights, "Point weights CSV for the empirical measure")
            ->check(CLI::ExistingFile);
    }

    Measure build(const FeatureSchema& schema) const {
        if (kind == "uniform") {
            if (!data.empty() || !weights.empty()) throw UsageError("--data and --weights need --measure empirical");
            return Measure::uniform();
        }
        if (data.empty()) throw UsageError("--measure empirical needs --data");
        std::vector<double> w;
        if (!weights.empty()) w = read_weights_csv(weights);
        return Measure::empirical(schema, read_points_csv(data, schema), std::move(w));
    }
};

CombineBudget budget_of(std::size_t max_nodes) {
    CombineBudget b;
    b.max_nodes = max_nodes;
    return b;
}

Tree load_single(const std::string& path) {
    ForestFile f = load_forest(path);
    if (f.trees.size() != 1)
        throw Error(ErrorCode::InvalidArgument, "'" + path + "' holds " + std::to_string(f.trees.size()) + " trees, expected one");
    return std::move(f.trees.front());
}

void require_same_schema(const FeatureSchema& a, const FeatureSchema& b) {
    if (!(a == b)) throw Error(ErrorCode::SchemaMismatch, "inputs have different schemas");
}

std::uint64_t default_seed() {
    const char* env = std::getenv("TREEALG_SEED");
    if (!env || !*env) return 0;
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (*end != '\0') throw UsageError("TREEALG_SEED must be a non-negative integer");
    return v;
}

struct OracleRow {
    std::string label;
    double exact;
    std::optional<double> grid;
    McEstimate mc;
};

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Exact algebra on decision trees: combination, affine sums, L2 distances and moments.",
                 "treealgebra"};
    app.set_help_all_flag("--help-all", "Print help for every subcommand");
    app.require_subcommand(1);
    app.get_formatter()->column_width(50);

    std::size_t max_nodes = 10'000'000;
    auto add_budget = [&](CLI::App* sub) {
        sub->add_option("--max-nodes", max_nodes, "Node budget for combined trees")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
    };

    // combine / affine
    std::string forest_path;
    std::string out_path;
    std::string weights_path;
    bool simplify_flag = false;
    auto* combine = app.add_subcommand("combine", "Combine all trees of a forest into one tree");
    combine->add_option("--forest", forest_path, "Input forest JSON")->required()->check(CLI::ExistingFile);
    combine->add_option("--out", out_path, "Output tree JSON")->required();
    combine->add_option("--weights", weights_path, "Tree weights CSV; collapses the tuples to their weighted sum")
        ->check(CLI::ExistingFile);
    combine->add_flag("--simplify", simplify_flag, "Merge sibling leaves with equal values");
    add_budget(combine);

    auto* affine = app.add_subcommand("affine", "Tree for the weighted sum of a forest");
    affine->add_option("--forest", forest_path, "Input forest JSON")->required()->check(CLI::ExistingFile);
    affine->add_option("--weights", weights_path, "Tree weights CSV")->required()->check(CLI::ExistingFile);
    affine->add_option("--out", out_path, "Output tree JSON")->required();
    affine->add_flag("--simplify", simplify_flag, "Merge sibling leaves with equal values");
    add_budget(affine);

    // dist / corr
    std::string a_path;
    std::string b_path;
    MeasureArgs measure_args;
    auto* dist = app.add_subcommand("dist", "L2 distance between two trees");
    auto* corr = app.add_subcommand("corr", "Correlation of two scalar trees");
    for (auto* sub : {dist, corr}) {
        sub->add_option("--a", a_path, "First tree JSON")->required()->check(CLI::ExistingFile);
        sub->add_option("--b", b_path, "Second tree JSON")->required()->check(CLI::ExistingFile);
        measure_args.attach(sub);
        add_budget(sub);
    }

    unsigned jobs = 1;
    auto* dist_matrix = app.add_subcommand("dist-matrix", "Pairwise distances between the trees of a forest");
    dist_matrix->add_option("--forest", forest_path, "Input forest JSON")->required()->check(CLI::ExistingFile);
    dist_matrix->add_option("--out", out_path, "Output matrix CSV")->required();
    dist_matrix->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    measure_args.attach(dist_matrix);
    add_budget(dist_matrix);

    std::string f_path;
    std::string g_path;
    auto* forest_dist = app.add_subcommand("forest-dist", "L2 distance between the sums of two forests");
    forest_dist->add_option("--f", f_path, "First forest JSON")->required()->check(CLI::ExistingFile);
    forest_dist->add_option("--g", g_path, "Second forest JSON")->required()->check(CLI::ExistingFile);
    measure_args.attach(forest_dist);
    add_budget(forest_dist);

    std::string matrix_path;
    std::string svg_path;
    std::size_t dims = 2;
    auto* mds = app.add_subcommand("mds", "Classical multidimensional scaling of a distance matrix");
    mds->add_option("--matrix", matrix_path, "Distance matrix CSV")->required()->check(CLI::ExistingFile);
    mds->add_option("--dims", dims, "Embedding dimension")->check(CLI::PositiveNumber)->capture_default_str();
    mds->add_option("--out", out_path, "Output coordinates CSV")->required();
    mds->add_option("--svg", svg_path, "Scatter plot of the first two coordinates");

    std::size_t samples = 100'000;
    std::uint64_t seed = 0;
    auto* oracle_check = app.add_subcommand("oracle-check", "Compare exact results with brute-force oracles");
    oracle_check->add_option("--forest", forest_path, "Input forest JSON")->required()->check(CLI::ExistingFile);
    measure_args.attach(oracle_check);
    oracle_check->add_option("--samples", samples, "Monte Carlo draws per quantity")
        ->check(CLI::Validator(
            [](std::string& v) {
                unsigned long long n = 0;
                auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
                if (ec != std::errc() || ptr != v.data() + v.size()) return std::string("not a sample count");
                return n >= 100 ? std::string() : std::string("needs at least 100 samples");
            },
            ">=100"))
        ->capture_default_str();
    oracle_check->add_option("--seed", seed, "Random seed (default: TREEALG_SEED, else 0)");
    add_budget(oracle_check);

    std::vector<std::string> validate_paths;
    auto* validate_cmd = app.add_subcommand("validate", "Check tree or forest files");
    validate_cmd->add_option("files", validate_paths, "Tree or forest JSON files")->required()->check(CLI::ExistingFile);

    std::string dialect = "flat-table";
    std::string in_path;
    std::string schema_path;
    auto* import_cmd = app.add_subcommand("import", "Translate an external forest dump into forest JSON");
    import_cmd->add_option("--dialect", dialect, "Input dialect")->check(CLI::IsMember({"flat-table"}))->capture_default_str();
    import_cmd->add_option("--in", in_path, "Input file")->required()->check(CLI::ExistingFile);
    import_cmd->add_option("--schema", schema_path, "Schema JSON (or any tree/forest document carrying one)")
        ->required()
        ->check(CLI::ExistingFile);
    import_cmd->add_option("--out", out_path, "Output forest JSON")->required();

    auto usage = [&](const std::string& msg) {
        diagnose(err, "USAGE", msg);
        err << app.help();
        return 1;
    };

    try {
        seed = default_seed();
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        return usage(e.what());
    } catch (const UsageError& e) {
        return usage(e.what());
    }

    try {
        if (combine->parsed() || affine->parsed()) {
            ForestFile forest = load_forest(forest_path);
            CombineBudget budget = budget_of(max_nodes);
            Tree result = [&] {
                if (weights_path.empty()) return combine_many(forest.trees, budget);
                std::vector<double> w = read_weights_csv(weights_path);
                return affine_combination(forest.trees, w, budget);
            }();
            if (simplify_flag) result = simplify(result);
            save_tree(result, out_path);
            out << "nodes=" << result.size() << " leaves=" << result.num_leaves() << "\n";
        } else if (dist->parsed() || corr->parsed()) {
            Tree a = load_single(a_path);
            Tree b = load_single(b_path);
            require_same_schema(a.schema(), b.schema());
            Measure m = measure_args.build(a.schema());
            double v = dist->parsed() ? tree_distance(a, b, m, budget_of(max_nodes))
                                      : tree_correlation(a, b, m, budget_of(max_nodes));
            out << fmt9(v) << "\n";
        } else if (dist_matrix->parsed()) {
            ForestFile forest = load_forest(forest_path);
            Measure m = measure_args.build(*forest.schema);
            Eigen::MatrixXd d = distance_matrix(forest.trees, m, jobs, budget_of(max_nodes));
            write_file_atomic(out_path, matrix_to_csv(d));
            out << "trees=" << d.rows() << " max_distance=" << fmt9(d.size() ? d.maxCoeff() : 0.0) << "\n";
        } else if (forest_dist->parsed()) {
            ForestFile f = load_forest(f_path);
            ForestFile g = load_forest(g_path);
            require_same_schema(*f.schema, *g.schema);
            Measure m = measure_args.build(*f.schema);
            out << fmt9(forest_distance(f.trees, g.trees, m, budget_of(max_nodes))) << "\n";
        } else if (mds->parsed()) {
            Eigen::MatrixXd d = read_matrix_csv(matrix_path);
            MdsResult r = classical_mds(d, dims);
            write_file_atomic(out_path, matrix_to_csv(r.coords));
            if (!svg_path.empty()) write_file_atomic(svg_path, scatter_svg(r.coords));
            out << "stress=" << fmt9(mds_stress(d, r.coords)) << " effective_dims=" << r.effective_dims << "\n";
        } else if (oracle_check->parsed()) {
            ForestFile forest = load_forest(forest_path);
            Measure m = measure_args.build(*forest.schema);
            std::vector<OracleRow> rows;
            std::uint64_t stream = seed;
            auto grid = [&](std::span<const Tree> trees, const Integrand& f) -> std::optional<double> {
                try {
                    return grid_integral(trees, f, m);
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::UnsupportedGeometry) throw;
                    return std::nullopt;
                }
            };
            for (std::size_t i = 0; i < forest.trees.size(); ++i) {
                const Tree& t = forest.trees[i];
                std::array<Tree, 2> pair{t, t};
                std::string name = "tree " + std::to_string(i);
                if (t.leaf_kind() == ValueKind::Scalar) {
                    std::span<const Tree> one(&t, 1);
                    rows.push_back({name + " mean", std::get<double>(tree_mean(t, m)), grid(one, integrands::raw_value()),
                                    monte_carlo_integral(one, integrands::raw_value(), m, samples, stream++)});
                    rows.push_back({name + " norm2", tree_norm_squared(t, m), grid(pair, integrands::product()),
                                    monte_carlo_integral(pair, integrands::product(), m, samples, stream++)});
                    const double mean = rows[rows.size() - 2].exact;
                    const double mean_grid = rows[rows.size() - 2].grid.value_or(0.0);
                    auto centred = [mean](std::span<const LeafValue* const> v) {
                        double d = std::get<Scalar>(*v[0]).value - mean;
                        return d * d;
                    };
                    std::optional<double> var_grid;
                    if (auto g2 = rows.back().grid) var_grid = *g2 - mean_grid * mean_grid;
                    rows.push_back({name + " variance", tree_variance(t, m), var_grid,
                                    monte_carlo_integral(one, centred, m, samples, stream++)});
                }
            }
            for (std::size_t i = 0; i < forest.trees.size(); ++i) {
                for (std::size_t j = i + 1; j < forest.trees.size(); ++j) {
                    std::array<Tree, 2> pair{forest.trees[i], forest.trees[j]};
                    double d = tree_distance(pair[0], pair[1], m, budget_of(max_nodes));
                    rows.push_back({"dist2 " + std::to_string(i) + " " + std::to_string(j), d * d,
                                    grid(pair, integrands::squared_difference()),
                                    monte_carlo_integral(pair, integrands::squared_difference(), m, samples, stream++)});
                }
            }
            double max_grid = 0.0;
            double max_z = 0.0;
            for (const OracleRow& r : rows) {
                out << r.label << " exact=" << fmt9(r.exact);
                if (r.grid) {
                    double delta = std::abs(r.exact - *r.grid);
                    max_grid = std::max(max_grid, delta);
                    out << " grid_delta=" << fmt3(delta);
                } else {
                    out << " grid_delta=NA";
                }
                double diff = std::abs(r.exact - r.mc.estimate);
                double z = r.mc.std_error > 0.0 ? diff / r.mc.std_error : (diff == 0.0 ? 0.0 : INFINITY);
                max_z = std::max(max_z, z);
                out << " mc=" << fmt9(r.mc.estimate) << " se=" << fmt3(r.mc.std_error) << " z=" << fmt3(z) << "\n";
            }
            out << "max_grid_delta=" << fmt3(max_grid) << " max_z=" << fmt3(max_z) << "\n";
        } else if (validate_cmd->parsed()) {
            std::optional<std::string> first;
            for (const std::string& path : validate_paths) {
                ForestFile f = load_forest(path, false);
                std::size_t bad = 0;
                for (std::size_t i = 0; i < f.trees.size(); ++i) {
                    for (const Violation& v : validate(f.trees[i])) {
                        std::string line = v.message + " at tree " + std::to_string(i) +
                                           (v.node ? " node " + std::to_string(*v.node) : std::string());
                        out << path << ": " << line << "\n";
                        if (!first) first = line;
                        ++bad;
                    }
                }
                if (bad == 0) out << path << ": ok (" << f.trees.size() << " trees)\n";
            }
            if (first) throw Error(ErrorCode::Validation, *first);
        } else if (import_cmd->parsed()) {
            SchemaPtr schema = schema_from_json(read_file(schema_path));
            ForestFile f = import_external_forest(in_path, dialect, schema);
            save_forest(f, out_path);
            out << "trees=" << f.trees.size() << "\n";
        }
    } catch (const UsageError& e) {
        return usage(e.what());
    } catch (const Error& e) {
        diagnose(err, error_code_name(e.code()), e.what());
        return 2;
    } catch (const std::exception& e) {
        diagnose(err, "INTERNAL", e.what());
        return 2;
    }
    return 0;
}

} // namespace treealg
