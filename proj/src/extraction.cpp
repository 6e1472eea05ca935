#include "segrelab/error.hpp"
#include "segrelab/sweeplab.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

using json = nlohmann::ordered_json;

namespace segrelab {

namespace {
double pair_l2(const Field& a, const Field& b, const Field& c, const Field& d) {
    return std::hypot(l2_norm(a - c), l2_norm(b - d));
}

json read_json(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot read " + path);
    return json::parse(is);
}
} // namespace

ExtractionResult diagonal_extraction(const std::vector<ExtractionInput>& runs_in, int depth) {
    if (runs_in.empty()) throw PreconditionError("diagonal_extraction: no runs");
    if (depth < 1) throw PreconditionError("diagonal_extraction: depth must be at least 1");
    std::vector<ExtractionInput> runs = runs_in;
    std::stable_sort(runs.begin(), runs.end(), [](const auto& a, const auto& b) { return a.kappa < b.kappa; });
    const Field& lu = runs.back().u_hat;
    const Field& lv = runs.back().v_hat;
    const bool one_d = lu.grid.dim() == 1;

    std::vector<double> to_limit;
    for (const auto& r : runs) to_limit.push_back(pair_l2(r.u_hat, r.v_hat, lu, lv));

    ExtractionResult res;
    res.requested = depth;
    // kappa_m advances to the smallest larger kappa that qualifies; the
    // previous kappa is reused only when none does.
    std::size_t prev = 0;
    for (int m = 1; m <= depth; ++m) {
        const double tol = 1.0 / (2.0 * m);
        std::vector<std::size_t> order;
        for (std::size_t i = m == 1 ? 0 : prev + 1; i < runs.size(); ++i) order.push_back(i);
        if (m > 1) order.push_back(prev);
        bool found = false;
        for (std::size_t i : order) {
            if (found) break;
            if (!(to_limit[i] < tol)) continue;
            for (const SimState& s : runs[i].states) {
                const double d = pair_l2(s.u, s.v, runs[i].u_hat, runs[i].v_hat);
                if (!(d < tol)) continue;
                ExtractionTerm term;
                term.m = m;
                term.kappa = runs[i].kappa;
                term.t = s.t;
                term.pair_to_limit = to_limit[i];
                term.state_to_pair = d;
                term.combined_l2 = pair_l2(s.u, s.v, lu, lv);
                term.linf = one_d ? std::max(linf_norm(s.u - lu), linf_norm(s.v - lv))
                                  : std::numeric_limits<double>::quiet_NaN();
                res.terms.push_back(term);
                prev = i;
                found = true;
                break;
            }
        }
        if (!found) {
            res.note = "tolerance 1/(2m) unreachable at m=" + std::to_string(m) + " within the available kappa range";
            break;
        }
        res.achieved = m;
    }
    res.complete = res.achieved == depth;
    return res;
}

std::vector<ExtractionInput> extraction_inputs(const SweepReport& rep) {
    std::vector<ExtractionInput> out;
    for (const auto& r : rep.runs) out.push_back({r.kappa, r.pair.u_hat, r.pair.v_hat, r.traj.states});
    return out;
}

std::vector<ExtractionInput> load_extraction_inputs(const std::string& report_dir) {
    const json rep = read_json(report_dir + "/report.json");
    std::vector<ExtractionInput> out;
    for (const auto& rec : rep.at("records")) {
        const std::string dir = report_dir + "/" + rec.at("dir").get<std::string>();
        const json run = read_json(dir + "/run.json");
        ExtractionInput in;
        in.kappa = run.at("kappa").get<double>();
        in.u_hat = read_snapshot(dir + "/" + run.at("u_hat").get<std::string>());
        in.v_hat = read_snapshot(dir + "/" + run.at("v_hat").get<std::string>());
        for (const auto& st : run.at("states")) {
            SimState s;
            s.u = read_snapshot(dir + "/" + st.at("u").get<std::string>(), &s.t);
            s.v = read_snapshot(dir + "/" + st.at("v").get<std::string>());
            s.step_index = st.at("step").get<long>();
            in.states.push_back(std::move(s));
        }
        out.push_back(std::move(in));
    }
    return out;
}

std::string extraction_json(const ExtractionResult& r) {
    json j;
    j["requested"] = r.requested;
    j["achieved"] = r.achieved;
    j["complete"] = r.complete;
    j["note"] = r.note;
    json terms = json::array();
    for (const auto& t : r.terms)
        terms.push_back({{"m", t.m},
                         {"kappa", t.kappa},
                         {"t", t.t},
                         {"pair_to_limit", t.pair_to_limit},
                         {"state_to_pair", t.state_to_pair},
                         {"combined_l2", t.combined_l2},
                         {"bound", 1.0 / t.m},
                         {"linf", std::isfinite(t.linf) ? json(t.linf) : json(nullptr)}});
    j["terms"] = terms;
    return j.dump(2);
}

} // namespace segrelab
