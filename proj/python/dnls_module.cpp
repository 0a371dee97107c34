#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dnls/harness.hpp"

namespace py = pybind11;

namespace {

py::dict ledger_to_dict(const dnls::evolve::MassLedger& ledger) {
    const std::size_t n = ledger.entries.size();
    std::vector<double> t(n), mass(n), absorption(n), lmp1(n), work(n), defect(n), resid(n),
        h1(n), lapl2(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& e = ledger.entries[i];
        t[i] = e.t;
        mass[i] = e.mass;
        absorption[i] = e.absorption;
        lmp1[i] = e.lmp1;
        work[i] = e.work;
        defect[i] = e.step_defect;
        resid[i] = e.identity_residual;
        h1[i] = e.h1;
        lapl2[i] = e.lapl2;
    }
    py::dict d;
    d["t"] = t;
    d["mass"] = mass;
    d["absorption"] = absorption;
    d["lmp1"] = lmp1;
    d["work"] = work;
    d["step_defect"] = defect;
    d["identity_residual"] = resid;
    d["h1"] = h1;
    d["lapl2"] = lapl2;
    return d;
}

}  // namespace

PYBIND11_MODULE(dnls_py, m) {
    m.doc() = "damped nonlinear Schroedinger laboratory (C++ core bindings)";

    m.def(
        "classify",
        [](std::complex<double> a, double mm) {
            return std::string(dnls::coeff::to_string(dnls::coeff::classify(a, dnls::coeff::Exponent(mm))));
        },
        py::arg("a"), py::arg("m"),
        "Membership of a damping coefficient: 'InD', 'InCOnly' or 'Outside'");

    m.def(
        "make_dm_coefficient",
        [](double mm, double re) {
            return dnls::coeff::make_dm_coefficient(dnls::coeff::Exponent(mm), re);
        },
        py::arg("m"), py::arg("re"), "Critical-ray coefficient with the given real part");

    m.def(
        "delta",
        [](int dim, int ell, double mm) {
            return dnls::coeff::delta(dim, ell, dnls::coeff::Exponent(mm));
        },
        py::arg("dim"), py::arg("ell"), py::arg("m"), "Extinction exponent delta_l");

    m.def("eps_star", &dnls::coeff::eps_star, py::arg("alpha"), py::arg("delta"),
          "Smallness threshold as a function of (alpha, delta)");

    m.def(
        "g_eps",
        [](std::complex<double> z, double mm, double eps) {
            return dnls::nonlin::g_eps(z, mm, eps);
        },
        py::arg("z"), py::arg("m"), py::arg("eps") = 0.0,
        "Pointwise saturating absorption map");

    m.def(
        "accretivity_witness",
        [](std::complex<double> z1, std::complex<double> z2, std::complex<double> a, double mm) {
            return dnls::nonlin::accretivity_witness(z1, z2, a, dnls::coeff::Exponent(mm));
        },
        py::arg("z1"), py::arg("z2"), py::arg("a"), py::arg("m"));

    m.def(
        "envelope_extinction_time",
        [](double y0, double alpha, double delta, double t0) {
            return dnls::extinct::Envelope(dnls::extinct::EnvelopeParams{y0, alpha, delta, t0, 1})
                .extinction_time();
        },
        py::arg("y0"), py::arg("alpha"), py::arg("delta"), py::arg("t0") = 0.0,
        "Closed-form extinction time of the comparison equation (inf when delta = 1)");

    m.def(
        "envelope_eval",
        [](double y0, double alpha, double delta, double t0, double t) {
            return dnls::extinct::Envelope(dnls::extinct::EnvelopeParams{y0, alpha, delta, t0, 1})(t);
        },
        py::arg("y0"), py::arg("alpha"), py::arg("delta"), py::arg("t0"), py::arg("t"));

    m.def(
        "run_simulation",
        [](const std::string& config_json, const std::vector<std::string>& checks) {
            dnls::harness::RunConfig cfg = dnls::harness::parse_config(config_json);
            dnls::harness::ScenarioResult r = dnls::harness::run_scenario(cfg, checks, "");
            py::dict out;
            out["exit_code"] = r.exit_code;
            out["report_json"] = r.report_json;
            if (r.t_num)
                out["t_num"] = *r.t_num;
            else
                out["t_num"] = py::none();
            if (r.run) out["ledger"] = ledger_to_dict(r.run->ledger);
            py::list cl;
            for (const auto& c : r.checks) {
                py::dict cd;
                cd["name"] = c.name;
                cd["pass"] = c.pass;
                cd["detail"] = c.detail;
                cl.append(cd);
            }
            out["checks"] = cl;
            return out;
        },
        py::arg("config_json"), py::arg("checks") = std::vector<std::string>{},
        "Run one scenario from a config JSON string; returns ledger and report");

    m.def(
        "detect_extinction",
        [](const std::vector<double>& t, const std::vector<double>& mass, double threshold) {
            dnls::evolve::MassLedger ledger;
            for (std::size_t i = 0; i < t.size() && i < mass.size(); ++i) {
                dnls::evolve::MassLedgerEntry e;
                e.t = t[i];
                e.mass = mass[i];
                ledger.entries.push_back(e);
            }
            const auto r = dnls::extinct::detect_extinction(ledger, threshold);
            return r ? py::object(py::float_(*r)) : py::object(py::none());
        },
        py::arg("t"), py::arg("mass"), py::arg("threshold") = 1e-12);

    m.def("presets", [] {
        py::list out;
        for (const auto& p : dnls::harness::presets()) {
            py::dict d;
            d["name"] = p.name;
            d["description"] = p.description;
            d["checks"] = p.checks;
            out.append(d);
        }
        return out;
    });

    m.attr("__version__") = "0.1.0";
}
