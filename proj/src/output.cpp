#include "frontcont/output.hpp"

#include "frontcont/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>

namespace frontcont {

std::string fmt(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    return buf;
}

void write_branch_csv(std::ostream& os, const Branch& br, int precision) {
    os << "step,s_arclength,lambda,mu,norm_u_inf,norm_u_C2proxy,N_proxy,sigma_minus,sigma_plus,flow_force,"
          "flow_force_dev,min_dxu,max_dxu,newton_iters";
    for (const auto& n : br.extra_names) os << ',' << n;
    os << ",termination\n";
    const std::string term = to_string(br.termination.kind);
    if (br.points.empty()) {
        os << std::string(14 + br.extra_names.size(), ',') << term << '\n';
        return;
    }
    for (size_t i = 0; i < br.points.size(); ++i) {
        const BranchPoint& p = br.points[i];
        const PointDiagnostics& d = p.diag;
        auto f = [&](double v) { return fmt(v, precision); };
        os << i << ',' << f(p.s) << ',' << f(p.lambda) << ',' << f(p.mu) << ',' << f(d.norm_inf) << ','
           << f(d.norm_c2) << ',' << f(d.N) << ',' << f(d.sigma_minus) << ',' << f(d.sigma_plus) << ','
           << f(d.flow_force) << ',' << f(d.flow_force_dev) << ',' << f(d.min_dxu) << ',' << f(d.max_dxu) << ','
           << p.newton_iters;
        for (const auto& e : d.extras) os << ',' << f(e.second);
        os << ',' << (i + 1 == br.points.size() ? term : "") << '\n';
    }
}

nlohmann::json branch_summary(const RunConfig& cfg, const Branch& br) {
    using nlohmann::json;
    json j;
    j["config"] = to_json(cfg);
    j["termination"] = {{"kind", to_string(br.termination.kind)},
                        {"tag", tag(br.termination.kind)},
                        {"message", br.termination.message}};
    j["accepted_points"] = br.points.size();
    if (!br.points.empty()) {
        auto range = [&](auto get) {
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            for (const auto& p : br.points) {
                lo = std::min(lo, get(p));
                hi = std::max(hi, get(p));
            }
            return json::array({lo, hi});
        };
        json e;
        e["lambda"] = range([](const BranchPoint& p) { return p.lambda; });
        e["abs_mu"] = range([](const BranchPoint& p) { return std::abs(p.mu); });
        e["norm_u_inf"] = range([](const BranchPoint& p) { return p.diag.norm_inf; });
        e["N_proxy"] = range([](const BranchPoint& p) { return p.diag.N; });
        e["sigma_minus"] = range([](const BranchPoint& p) { return p.diag.sigma_minus; });
        e["sigma_plus"] = range([](const BranchPoint& p) { return p.diag.sigma_plus; });
        e["flow_force"] = range([](const BranchPoint& p) { return p.diag.flow_force; });
        e["flow_force_dev"] = range([](const BranchPoint& p) { return p.diag.flow_force_dev; });
        e["residual"] = range([](const BranchPoint& p) { return p.diag.residual; });
        for (size_t k = 0; k < br.extra_names.size(); ++k)
            e[br.extra_names[k]] = range([k](const BranchPoint& p) { return p.diag.extras[k].second; });
        j["extrema"] = e;
        j["final_lambda"] = br.points.back().lambda;
        j["final_arclength"] = br.points.back().s;
    }
    return j;
}

bool directory_writable(const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir, ec)) return false;
    const fs::path probe = fs::path(dir) / ".write_probe";
    {
        std::ofstream os(probe);
        if (!os) return false;
        os << "ok";
        if (!os) return false;
    }
    fs::remove(probe, ec);
    return true;
}

std::vector<std::string> write_run_artifacts(const std::string& dir, const RunConfig& cfg, const Branch& br) {
    namespace fs = std::filesystem;
    std::vector<std::string> written;
    const int prec = cfg.output.precision;
    const std::string csv = (fs::path(dir) / "branch.csv").string();
    {
        std::ofstream os(csv);
        if (!os) throw Error("cannot write '" + csv + "'");
        write_branch_csv(os, br, prec);
    }
    written.push_back(csv);
    const std::string summary = (fs::path(dir) / "summary.json").string();
    {
        std::ofstream os(summary);
        if (!os) throw Error("cannot write '" + summary + "'");
        os << branch_summary(cfg, br).dump(2) << '\n';
    }
    written.push_back(summary);
    const int stride = cfg.output.snapshot_stride;
    if (stride > 0) {
        for (size_t i = 0; i < br.points.size(); ++i) {
            if (i % static_cast<size_t>(stride) != 0 && i + 1 != br.points.size()) continue;
            char name[64];
            std::snprintf(name, sizeof name, "snapshot_%04zu.txt", i);
            const std::string path = (fs::path(dir) / name).string();
            write_snapshot(path, br.points[i].u);
            written.push_back(path);
        }
    }
    return written;
}

}  // namespace frontcont
