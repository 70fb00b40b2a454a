#include "qtm/io.hpp"

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace qtm {

const char* const schema_version = "1.0";

json complex_json(cd v) { return json::array({v.real(), v.imag()}); }

json coeff_array(const std::vector<cd>& e) {
    json a = json::array();
    for (cd c : e) a.push_back(complex_json(c));
    return a;
}

json to_json(const QPolynomial& q) {
    return json{{"kind", q.kind == QKind::plus ? "plus" : "minus"},
                {"sector", q.sector},
                {"e", coeff_array(q.e)}};
}

json to_json(const WronskianSolution& s) {
    return json{{"sector", s.e_plus.sector},
                {"e_plus", coeff_array(s.e_plus.e)},
                {"e_minus", coeff_array(s.e_minus.e)},
                {"residual", s.residual},
                {"flags",
                 json{{"reciprocal", s.flags.reciprocal},
                      {"conjugate", s.flags.conjugate},
                      {"cce", s.flags.cce}}},
                {"seed", s.seed},
                {"start_index", s.start_index}};
}

json to_json(const SpectrumRecord& r) {
    json eigs = json::array();
    for (cd v : r.eigenvalues) eigs.push_back(complex_json(v));
    return json{{"z", complex_json(r.z)},
                {"N", r.N},
                {"eigenvalues", eigs},
                {"sectors", r.sector},
                {"residuals", r.residuals}};
}

json to_json(const RelationReport& r) {
    json cm = json::object();
    for (const auto& [k, v] : r.cmetrics) cm[k] = complex_json(v);
    return json{{"relation", relation_name(r.id)},
                {"residual", r.residual},
                {"scale", r.scale},
                {"tol", r.tol},
                {"pass", r.pass},
                {"metrics", r.metrics},
                {"cmetrics", cm}};
}

json to_json(const ThermoPoint& t) {
    json lam = json::array();
    for (cd v : t.lambda_N) lam.push_back(complex_json(v));
    return json{{"beta", t.beta},
                {"h", t.h},
                {"gamma", t.gamma},
                {"N_list", t.N_list},
                {"lambda_N", lam},
                {"f_extrapolated", t.f_extrapolated},
                {"fit",
                 json{{"coeffs", t.fit.coeffs},
                      {"fit_residual", t.fit.fit_residual},
                      {"loo_max_shift", t.fit.loo_max_shift},
                      {"loo_applicable", t.fit.loo_applicable},
                      {"extrap_imag", t.fit.extrap_imag},
                      {"max_lambda_imag", t.fit.max_lambda_imag}}}};
}

void write_text_atomic(const std::string& path, const std::string& text) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp =
        target.parent_path() /
        (target.filename().string() + ".tmp." + std::to_string(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error("write_text_atomic: cannot open " + tmp.string());
        out << text;
        out.flush();
        if (!out)
            throw Error("write_text_atomic: short write to " + tmp.string());
    }
    fs::rename(tmp, target);
}

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

std::string thermo_csv(const ThermoPoint& t) {
    std::string out = "N,Re(lambda),Im(lambda),ln_lambda,f_extrapolated,fit_residual\n";
    for (size_t i = 0; i < t.N_list.size(); ++i) {
        const cd lam = t.lambda_N[i];
        out += std::to_string(t.N_list[i]) + "," + num(lam.real()) + "," +
               num(lam.imag()) + "," + num(std::log(std::abs(lam))) + "," +
               num(t.f_extrapolated) + "," + num(t.fit.fit_residual) + "\n";
    }
    return out;
}

std::string spectrum_csv(const SpectrumRecord& r) {
    std::string out = "index,sector,Re(lambda),Im(lambda),residual\n";
    for (size_t i = 0; i < r.eigenvalues.size(); ++i)
        out += std::to_string(i) + "," + std::to_string(r.sector[i]) + "," +
               num(r.eigenvalues[i].real()) + "," + num(r.eigenvalues[i].imag()) +
               "," + num(r.residuals[i]) + "\n";
    return out;
}

} // namespace qtm
