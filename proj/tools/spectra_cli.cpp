// spectra: command-line front end for the shadow library.
#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "spectra/spectra.hpp"

using namespace spectra;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        fail(ErrorKind::parse, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

MatrixXd matrix_from_json(const json& j)
{
    if (j.is_number())
        return MatrixXd::Constant(1, 1, j.get<double>());
    if (!j.is_array() || j.empty())
        fail(ErrorKind::parse, "matrix must be a nonempty array of rows");
    if (!j[0].is_array()) {
        MatrixXd M(j.size(), 1);
        for (std::size_t i = 0; i < j.size(); ++i)
            M(i, 0) = j[i].get<double>();
        return M;
    }
    const std::size_t cols = j[0].size();
    MatrixXd M(j.size(), cols);
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_array() || j[i].size() != cols)
            fail(ErrorKind::parse, "matrix rows must have equal length");
        for (std::size_t c = 0; c < cols; ++c)
            M(i, c) = j[i][c].get<double>();
    }
    return M;
}

MatrixXd matrix_from_csv(const std::string& text)
{
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        std::vector<double> r;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ','))
            r.push_back(std::stod(cell));
        if (!rows.empty() && r.size() != rows[0].size())
            fail(ErrorKind::parse, "CSV rows must have equal length");
        rows.push_back(std::move(r));
    }
    if (rows.empty())
        fail(ErrorKind::parse, "empty CSV matrix");
    MatrixXd M(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t c = 0; c < rows[i].size(); ++c)
            M(i, c) = rows[i][c];
    return M;
}

// Inline JSON, or a path to a .json / .csv file.
MatrixXd read_matrix(const std::string& arg)
{
    if (std::filesystem::exists(arg)) {
        const std::string text = slurp(arg);
        if (arg.ends_with(".csv"))
            return matrix_from_csv(text);
        return matrix_from_json(json::parse(text));
    }
    try {
        return matrix_from_json(json::parse(arg));
    } catch (const json::exception& e) {
        fail(ErrorKind::parse, std::string("bad matrix argument: ") + e.what());
    }
}

// JSON array of matrices, inline or from a .json file.
std::vector<MatrixXd> read_matrix_list(const std::string& arg)
{
    try {
        const json j = std::filesystem::exists(arg) ? json::parse(slurp(arg)) : json::parse(arg);
        if (!j.is_array() || j.empty())
            fail(ErrorKind::parse, "bad matrix list: non-empty array of matrices expected");
        std::vector<MatrixXd> out;
        for (const auto& m : j)
            out.push_back(matrix_from_json(m));
        return out;
    } catch (const json::exception& e) {
        fail(ErrorKind::parse, std::string("bad matrix list: ") + e.what());
    }
}

VectorXd read_vector(const std::string& arg)
{
    MatrixXd M = read_matrix(arg);
    if (M.cols() != 1 && M.rows() != 1)
        fail(ErrorKind::parse, "vector expected");
    return M.cols() == 1 ? VectorXd(M.col(0)) : VectorXd(M.row(0).transpose());
}

VectorXd vector_field(const json& j, const char* key)
{
    if (!j.contains(key))
        fail(ErrorKind::parse, std::string("missing field '") + key + "'");
    return read_vector(j.at(key).dump());
}

MatrixXd matrix_field(const json& j, const char* key)
{
    if (!j.contains(key))
        fail(ErrorKind::parse, std::string("missing field '") + key + "'");
    return matrix_from_json(j.at(key));
}

Rational rational_field(const json& j, const char* key)
{
    if (!j.contains(key))
        fail(ErrorKind::parse, std::string("missing field '") + key + "'");
    const json& v = j.at(key);
    return Rational::parse(v.is_string() ? v.get<std::string>() : v.dump());
}

json report_json(const SolveReport& r)
{
    return {{"status", to_string(r.status)},
            {"optimum", r.ok() ? json(r.optimum) : json(nullptr)},
            {"iterations", r.iterations},
            {"solve_time", r.solve_time},
            {"inaccurate", r.inaccurate}};
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

Shadow convert_source(const std::string& kind, const json& src)
{
    if (kind == "hpoly")
        return from_hpolyhedron({matrix_field(src, "A"), vector_field(src, "b")});
    if (kind == "ellipsoid")
        return from_ellipsoid({vector_field(src, "c"), matrix_field(src, "Q")});
    if (kind == "zonotope")
        return from_zonotope({vector_field(src, "c"), matrix_field(src, "G")});
    if (kind == "cz" || kind == "etope") {
        const VectorXd c = vector_field(src, "c");
        const MatrixXd G = matrix_field(src, "G");
        MatrixXd A(0, G.cols());
        VectorXd b(0);
        if (src.contains("A") && !src.at("A").empty()) {
            A = matrix_field(src, "A");
            b = vector_field(src, "b");
        }
        if (kind == "cz")
            return from_constrained_zonotope(c, G, A, b);
        Ellipsotope E{rational_field(src, "p"), c, G, A, b, {}};
        if (src.contains("index_sets")) {
            for (const auto& J : src.at("index_sets")) {
                std::vector<int> s;
                for (const auto& i : J)
                    s.push_back(i.get<int>() - 1);
                E.index_sets.push_back(std::move(s));
            }
        } else {
            E.index_sets.emplace_back();
            for (int i = 0; i < G.cols(); ++i)
                E.index_sets.back().push_back(i);
        }
        return from_ellipsotope(E);
    }
    fail(ErrorKind::contract, "unknown conversion: " + kind);
}

int run(int argc, char** argv)
{
    CLI::App app{"spectra: spectrahedral shadow toolkit"};
    app.require_subcommand(1);

    // op
    auto* op = app.add_subcommand("op", "set operation on shadow files");
    std::string verb, in1, in2, out, matrix, matrices, vec, pstr = "1";
    op->add_option("verb", verb, "translate|map|invmap|sum|intersect|product|lpsum|cone|convhull|polymap")
        ->required()
        ->check(CLI::IsMember({"translate", "map", "invmap", "sum", "intersect", "product", "lpsum", "cone",
                               "convhull", "polymap"}));
    op->add_option("--in", in1, "first input shadow")->required();
    op->add_option("--in2", in2, "second input shadow");
    op->add_option("--matrix", matrix, "matrix as inline JSON or a .json/.csv file");
    op->add_option("--matrices", matrices, "vertex matrices for polymap: JSON array, inline or a .json file");
    op->add_option("--vector", vec, "translation vector");
    op->add_option("-p,--p", pstr, "exponent for lpsum: a/b, integer or inf");
    op->add_option("--out", out, "output shadow")->required();

    // check
    auto* check = app.add_subcommand("check", "emptiness, membership or boundedness");
    std::string cverb, cin, point;
    check->add_option("verb", cverb, "empty|member|bounded")->required()->check(
        CLI::IsMember({"empty", "member", "bounded"}));
    check->add_option("--in", cin, "input shadow")->required();
    check->add_option("--point", point, "point for member");

    // convert
    auto* conv = app.add_subcommand("convert", "classical set description to shadow");
    std::string ckind, csrc, cout_path, cp = "2";
    int cdim = 2;
    conv->add_option("kind", ckind, "hpoly|ellipsoid|zonotope|cz|etope|ball")->required()->check(
        CLI::IsMember({"hpoly", "ellipsoid", "zonotope", "cz", "etope", "ball"}));
    conv->add_option("--src", csrc, "source description (JSON)");
    conv->add_option("--dim", cdim, "dimension for ball");
    conv->add_option("-p,--p", cp, "exponent for ball");
    conv->add_option("--out", cout_path, "output shadow")->required();

    // reduce
    auto* red = app.add_subcommand("reduce", "order reduction");
    std::string rin, rout, strategy = "lowrank";
    int target = 8;
    bool isotropic = false;
    std::uint64_t rseed = 0;
    red->add_option("--in", rin)->required();
    red->add_option("--out", rout)->required();
    red->add_option("--strategy", strategy)->check(CLI::IsMember({"lowrank", "poly"}));
    red->add_option("--target-size", target);
    red->add_flag("--isotropic", isotropic);
    red->add_option("--seed", rseed);

    // estimate
    auto* est = app.add_subcommand("estimate", "set-membership estimation run");
    std::string sys_path, est_out;
    int horizon = 40, reduce_every = 0, est_target = 10;
    std::uint64_t eseed = 0;
    bool est_volume = false;
    est->add_option("--system", sys_path, "system JSON {A,B,L,C,F}; random 2-D system if omitted");
    est->add_option("--horizon", horizon);
    est->add_option("--reduce-every", reduce_every, "0 disables reduction");
    est->add_option("--target-size", est_target);
    est->add_option("--seed", eseed);
    est->add_flag("--volume", est_volume, "log volume estimates");
    est->add_option("--out", est_out)->required();

    // reach
    auto* reach = app.add_subcommand("reach", "Lp-sum reachability run");
    std::string reach_cfg, reach_out;
    reach->add_option("--config", reach_cfg)->required();
    reach->add_option("--out", reach_out)->required();

    // volume
    auto* vol = app.add_subcommand("volume", "volume estimate");
    std::string vin;
    int vdirs = 128;
    vol->add_option("--in", vin)->required();
    vol->add_option("--dirs", vdirs);

    // plot
    auto* plot = app.add_subcommand("plot", "boundary points as CSV");
    std::string pin, pout;
    int pdirs = 64;
    plot->add_option("--in", pin)->required();
    plot->add_option("--dirs", pdirs);
    plot->add_option("--out", pout)->required();

    CLI11_PARSE(app, argc, argv);

    if (*op) {
        const Shadow S = read_shadow_file(in1);
        auto second = [&] {
            if (in2.empty())
                fail(ErrorKind::contract, verb + " needs --in2");
            return read_shadow_file(in2);
        };
        auto need_matrix = [&] {
            if (matrix.empty())
                fail(ErrorKind::contract, verb + " needs --matrix");
            return read_matrix(matrix);
        };
        std::optional<Shadow> R;
        json info = json::object();
        if (verb == "translate") {
            if (vec.empty())
                fail(ErrorKind::contract, "translate needs --vector");
            R = translate(S, read_vector(vec));
        } else if (verb == "map") {
            R = linear_map(S, need_matrix());
        } else if (verb == "invmap") {
            R = linear_inverse_map(S, need_matrix());
        } else if (verb == "sum") {
            R = minkowski_sum(S, second());
        } else if (verb == "intersect") {
            R = intersect(S, second());
        } else if (verb == "product") {
            R = cartesian_product(S, second());
        } else if (verb == "lpsum") {
            R = lp_sum(S, second(), Rational::parse(pstr));
        } else {
            std::optional<HullResult> h;
            if (verb == "cone") {
                h = conic_hull(S);
            } else if (verb == "convhull") {
                h = convex_hull(S, second());
            } else {
                PolytopicMap M;
                M.vertices = read_matrix_list(matrices);
                h = polytopic_map(S, M);
            }
            info["exact"] = h->exact;
            R = h->set;
        }
        write_shadow_file(out, *R);
        info["n"] = R->n();
        info["m"] = R->m();
        info["size"] = R->size();
        std::cout << info.dump() << '\n';
        return 0;
    }
    if (*check) {
        const Shadow S = read_shadow_file(cin);
        json rep;
        bool answer = false;
        if (cverb == "empty") {
            auto r = is_empty(S);
            answer = r.empty;
            rep = {{"empty", r.empty}, {"margin", finite_or_null(r.margin)}, {"solver", report_json(r.report)}};
        } else if (cverb == "member") {
            if (point.empty())
                fail(ErrorKind::contract, "member needs --point");
            auto r = contains_point(S, read_vector(point));
            answer = r.member;
            rep = {{"member", r.member}, {"margin", finite_or_null(r.margin)}, {"solver", report_json(r.report)}};
        } else {
            auto r = is_bounded(S);
            answer = r.bounded;
            rep = {{"bounded", r.bounded},
                   {"branch", to_string(r.branch)},
                   {"rank_p", r.rank_p},
                   {"rank_q", r.rank_q},
                   {"rank_pq", r.rank_pq},
                   {"eps_b", r.eps_b ? finite_or_null(*r.eps_b) : json(nullptr)}};
        }
        std::cout << rep.dump() << '\n';
        return answer ? 0 : 1;
    }
    if (*conv) {
        Shadow S = ckind == "ball" ? from_pnorm_ball(cdim, Rational::parse(cp))
                                   : convert_source(ckind, json::parse(slurp(csrc)));
        write_shadow_file(cout_path, S);
        std::cout << json{{"n", S.n()}, {"m", S.m()}, {"size", S.size()}}.dump() << '\n';
        return 0;
    }
    if (*red) {
        ReductionConfig cfg;
        cfg.target_size = target;
        cfg.strategy = strategy == "poly" ? ReductionStrategy::polyhedral : ReductionStrategy::lowrank;
        cfg.isotropic = isotropic;
        cfg.seed = rseed;
        Shadow S = reduce(read_shadow_file(rin), cfg);
        write_shadow_file(rout, S);
        std::cout << json{{"n", S.n()}, {"m", S.m()}, {"size", S.size()}}.dump() << '\n';
        return 0;
    }
    if (*est) {
        std::optional<int> every;
        if (reduce_every > 0)
            every = reduce_every;
        EstimationRun run = random_estimation_run(2, horizon, every, eseed);
        if (!sys_path.empty()) {
            json j = json::parse(slurp(sys_path));
            LinearSystem sys{matrix_field(j, "A"), matrix_field(j, "B"), matrix_field(j, "L"), matrix_field(j, "C"),
                             matrix_field(j, "F")};
            const int d = static_cast<int>(sys.A.rows()), nw = static_cast<int>(sys.L.cols());
            const int nv = static_cast<int>(sys.F.cols());
            run = EstimationRun{sys,
                                from_zonotope({VectorXd::Zero(d), MatrixXd::Identity(d, d)}),
                                from_zonotope({VectorXd::Zero(nw), MatrixXd::Identity(nw, nw)}),
                                from_ellipsoid({VectorXd::Zero(nv), 0.25 * MatrixXd::Identity(nv, nv)}),
                                horizon,
                                every,
                                est_target,
                                eseed};
        }
        run.reduce_target = est_target;
        std::ofstream log(est_out);
        EstimationResult r = run_estimation(run, &log, est_volume);
        std::cout << json{{"steps", run.horizon}, {"contained", r.contained}}.dump() << '\n';
        return r.contained == run.horizon ? 0 : 1;
    }
    if (*reach) {
        json j = json::parse(slurp(reach_cfg));
        ReachRun run;
        run.A = matrix_field(j, "A");
        run.B = matrix_field(j, "B");
        run.x_bar0 = vector_field(j, "x_bar0");
        run.u_bar = vector_field(j, "u_bar");
        for (const auto& q : j.at("Q_list"))
            run.Q_list.push_back(matrix_from_json(q));
        for (const auto& u : j.at("U_list"))
            run.U_list.push_back(matrix_from_json(u));
        run.p1 = rational_field(j, "p1");
        run.p2 = rational_field(j, "p2");
        run.horizon = j.value("horizon", 10);
        const int samples = j.value("samples", 100);
        std::ofstream log(reach_out);
        ReachResult r = run_reach(run, samples, j.value("seed", 0), &log);
        int passed = 0, total = 0;
        for (const auto& l : r.logs)
            passed += l.containment_checks, total += l.containment_total;
        std::cout << json{{"steps", run.horizon}, {"checks_passed", passed}, {"checks", total}}.dump() << '\n';
        return passed == total ? 0 : 1;
    }
    if (*vol) {
        VolumeEstimate v = estimate_volume(read_shadow_file(vin), vdirs);
        std::cout << json{{"volume", v.value}, {"error", v.error}, {"degenerate", v.degenerate}}.dump() << '\n';
        return 0;
    }
    if (*plot) {
        std::ofstream os(pout);
        write_plot_csv(os, emit_plot_data(read_shadow_file(pin), pdirs));
        return 0;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    try {
        return run(argc, argv);
    } catch (const Error& e) {
        std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
