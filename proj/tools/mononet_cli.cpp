#include "mononet/certify.hpp"
#include "mononet/flatten.hpp"
#include "mononet/serialize.hpp"
#include "mononet/synthesis.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace mononet;
using nlohmann::json;

namespace {

std::string fmt(const Real& x) { return x.str(17, std::ios_base::scientific); }

struct Row {
  std::string command, stage, status;
  std::string d, eps, C, k, L;
  std::string neurons, terms, cap;
  std::string bound_certified, bound_measured;
};

constexpr const char* kHeader =
    "command,d,eps,C,k,L,stage,neurons,terms,cap,bound_certified,bound_measured,status";

void emit(const std::vector<Row>& rows, const std::string& format, std::ostream& os) {
  if (format == "csv") {
    os << kHeader << "\n";
    for (const auto& r : rows)
      os << r.command << ',' << r.d << ',' << r.eps << ',' << r.C << ',' << r.k << ',' << r.L
         << ',' << r.stage << ',' << r.neurons << ',' << r.terms << ',' << r.cap << ','
         << r.bound_certified << ',' << r.bound_measured << ',' << r.status << "\n";
    return;
  }
  json out = json::array();
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  const long long ts = std::chrono::duration_cast<std::chrono::seconds>(now).count();
  for (const auto& r : rows) {
    json j{{"command", r.command},
           {"d", r.d},
           {"eps", r.eps},
           {"C", r.C},
           {"k", r.k},
           {"L", r.L},
           {"stage", r.stage},
           {"neurons", r.neurons},
           {"terms", r.terms},
           {"cap", r.cap},
           {"bound_certified", r.bound_certified},
           {"bound_measured", r.bound_measured},
           {"status", r.status},
           {"timestamp", ts}};
    out.push_back(std::move(j));
  }
  os << out.dump(2) << "\n";
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw input_error("cannot open output file: " + path);
  f << text;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw input_error("cannot open network file: " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

std::string pass_fail(bool ok) { return ok ? "pass" : "fail"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synthesis and certification of exp/ReLU approximants to monomials"};
  app.allow_extras(false);

  std::string command_flag, format = "csv", out_path = "network.json", net_path, target = "product";
  std::string coeffs_csv;
  std::vector<std::string> words;
  double d_in = 0, L_in = 1, n_in = -1;
  std::string eps_in, C_in, k_in, delta_in, margin_in = "0", box_lo_in = "0", box_hi_in = "1";
  unsigned precision_bits_in = 256;
  std::size_t budget_terms = 2000000;
  long long seed = 0;
  std::string d_list, eps_list, L_list;

  app.add_option("words", words, "command words, e.g. 'synth monomial'");
  app.add_option("--command", command_flag, "command name (alternative to the positional form)");
  app.add_option("--d", d_in, "input dimension");
  app.add_option("--eps", eps_in, "target uniform error");
  app.add_option("--C", C_in, "log-domain cutoff: delta = exp(-C/d)");
  app.add_option("--k", k_in, "symmetric box half-width");
  app.add_option("--L", L_in, "hidden depth for the lower bound");
  app.add_option("--n", n_in, "monomial degree / network width");
  app.add_option("--delta", delta_in, "left endpoint for the log target");
  app.add_option("--coeffs", coeffs_csv, "comma-separated polynomial coefficients, constant first");
  app.add_option("--precision-bits", precision_bits_in, "mantissa bits for extended precision");
  app.add_option("--margin", margin_in, "certification margin");
  app.add_option("--budget-terms", budget_terms, "term/neuron budget for flattening");
  app.add_option("--out", out_path, "network output path");
  app.add_option("--net", net_path, "existing network file (certify / lowerbound)");
  app.add_option("--target", target, "certification target: product|monomial|log|exp");
  app.add_option("--format", format, "report format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--seed", seed, "seed for randomized drivers");
  app.add_option("--box-lo", box_lo_in, "box lower endpoint (certify)");
  app.add_option("--box-hi", box_hi_in, "box upper endpoint (certify)");
  app.add_option("--d-list", d_list, "comma list of d values for the lowerbound sweep");
  app.add_option("--eps-list", eps_list, "comma list of eps values for the lowerbound sweep");
  app.add_option("--L-list", L_list, "comma list of L values for the lowerbound sweep");

  CLI11_PARSE(app, argc, argv);
  set_precision_bits(precision_bits_in);

  if (!command_flag.empty()) {
    std::istringstream is(command_flag);
    std::vector<std::string> w;
    for (std::string s; is >> s;) w.push_back(s);
    w.insert(w.end(), words.begin(), words.end());
    words = std::move(w);
  }
  if (words.empty()) {
    std::cerr << "no command given; expected synth|certify|lowerbound\n";
    return 2;
  }
  const std::string cmd = words[0];
  const std::string kind = words.size() > 1 ? words[1] : "";

  std::vector<Row> rows;
  bool ok = true;
  try {
    const Real eps = eps_in.empty() ? Real(0) : from_decimal_string(eps_in);
    const Real Cv = C_in.empty() ? Real(0) : from_decimal_string(C_in);
    const Real kv = k_in.empty() ? Real(0) : from_decimal_string(k_in);
    const unsigned d = static_cast<unsigned>(d_in);
    const unsigned L = static_cast<unsigned>(L_in);

    if (cmd == "synth") {
      Row row;
      row.command = "synth " + kind;
      row.d = std::to_string(std::max(1u, kind == "monomial" || kind == "polynomial" || kind == "log" ? 1u : d));
      row.eps = eps_in;
      row.C = C_in;
      row.k = k_in;
      std::string net_doc;
      if (kind == "monomial") {
        if (n_in < 0) throw input_error("synth monomial needs --n");
        const unsigned n = static_cast<unsigned>(n_in);
        MonomialSynthesis ms = synth_monomial_exp(n, eps > 0 ? eps : Real(1) / 1000);
        net_doc = serialize(ms.net);
        row.stage = ms.report.stage;
        row.neurons = row.terms = std::to_string(ms.net.terms.size());
        row.cap = std::to_string(n + 1);
        row.bound_certified = fmt(ms.report.bound);
        row.bound_measured = fmt(ms.report.grid_sup);
        ok = eps <= 0 || ms.report.bound <= eps;
      } else if (kind == "polynomial") {
        if (coeffs_csv.empty()) throw input_error("synth polynomial needs --coeffs");
        std::vector<Real> a;
        std::istringstream is(coeffs_csv);
        for (std::string tok; std::getline(is, tok, ',');) a.push_back(from_decimal_string(tok));
        PolynomialCoeffs p = PolynomialCoeffs::from(std::move(a));
        PolynomialSynthesis ps = synth_polynomial_exp(p, eps);
        net_doc = serialize(ps.net);
        row.stage = ps.report.stage;
        row.neurons = row.terms = std::to_string(ps.net.terms.size());
        row.cap = std::to_string(ps.term_cap);
        row.bound_certified = fmt(ps.report.bound);
        row.bound_measured = fmt(ps.report.grid_sup);
        ok = ps.report.bound <= eps;
      } else if (kind == "log") {
        const Real delta = delta_in.empty() ? exp(-Cv / std::max(1u, d)) : from_decimal_string(delta_in);
        LogSynthesis ls = synth_log_exp(delta, eps);
        net_doc = serialize(ls.net);
        row.stage = ls.report.stage;
        row.neurons = row.terms = std::to_string(ls.net.terms.size());
        row.cap = std::to_string(ls.degree_cap);
        row.bound_certified = fmt(ls.report.bound);
        row.bound_measured = fmt(ls.report.grid_sup);
        ok = ls.report.bound <= eps;
      } else if (kind == "product2") {
        ProductTwoLayerSynthesis ps = synth_product_two_layer(d, Cv, eps);
        net_doc = serialize(ps.net);
        row.stage = ps.report.stage;
        row.neurons = std::to_string(ps.net.layers[0].weights.rows() + 1);
        row.terms = std::to_string(ps.log_unit.terms.size());
        row.bound_certified = fmt(ps.report.bound);
        row.bound_measured = fmt(ps.report.grid_sup);
        ok = ps.report.bound <= eps;
      } else if (kind == "exact2d") {
        ExactSmoothSynthesis es = synth_exact_smooth(d, eps, kv);
        net_doc = serialize(es.net);
        row.stage = es.report.stage;
        row.neurons = row.terms = std::to_string(es.net.terms.size());
        row.cap = std::to_string(std::size_t(1) << d);
        row.bound_certified = fmt(es.report.bound);
        row.bound_measured = fmt(es.report.grid_sup);
        ok = es.report.bound <= eps;
      } else if (kind == "productReLU") {
        FlattenBudget budget;
        budget.max_terms = budget_terms;
        budget.max_neurons = budget_terms;
        ProductReluSynthesis pr = synth_product_shallow_relu(d, Cv, eps, budget);
        net_doc = serialize(pr.relu.net);
        ok = pr.bound <= eps;
        const std::string counts[] = {
            std::to_string(pr.two_layer.net.layers[0].weights.rows() + 1),
            std::to_string(pr.flat.net.terms.size()), std::to_string(pr.relu.neurons),
            std::to_string(pr.relu.neurons)};
        const std::string caps[] = {"", fmt(pr.flat.pre_merge_count), fmt(pr.relu.neuron_cap), ""};
        for (std::size_t i = 0; i < pr.stages.size(); ++i) {
          Row r = row;
          r.stage = pr.stages[i].stage;
          r.neurons = counts[i];
          r.terms = i == 1 ? counts[1] : "";
          r.cap = caps[i];
          r.bound_certified = fmt(pr.stages[i].bound);
          r.bound_measured = fmt(pr.stages[i].grid_sup);
          r.status = pr.stages[i].method == "measured_only" ? "measured"
                                                            : pass_fail(pr.stages[i].certified);
          rows.push_back(std::move(r));
        }
        Row total = row;
        total.stage = "total";
        total.neurons = std::to_string(pr.relu.neurons);
        total.bound_certified = fmt(pr.bound);
        total.bound_measured = fmt(pr.measured01);
        total.status = pass_fail(ok);
        rows.push_back(std::move(total));
      } else {
        throw input_error("unknown synth kind: " + kind);
      }
      if (kind != "productReLU") {
        row.status = pass_fail(ok);
        rows.push_back(std::move(row));
      }
      if (!out_path.empty()) write_file(out_path, net_doc);
    } else if (cmd == "certify") {
      if (net_path.empty()) throw input_error("certify needs --net");
      NetworkValue net = deserialize(read_file(net_path));
      const Eigen::Index nd = std::holds_alternative<ShallowExpSum>(net)
                                  ? std::get<ShallowExpSum>(net).d
                                  : std::get<LayeredNetwork>(net).d;
      TargetSpec spec;
      if (target == "product") spec = {TargetKind::Product, 1};
      else if (target == "monomial") spec = {TargetKind::Monomial, static_cast<unsigned>(std::max(0.0, n_in))};
      else if (target == "log") spec = {TargetKind::Log, 1};
      else if (target == "exp") spec = {TargetKind::Exp, 1};
      else throw input_error("unknown target: " + target);
      Box box = Box::cube(nd, from_decimal_string(box_lo_in), from_decimal_string(box_hi_in));
      CertifiedErrorReport rep = certify_sup_error(net, spec, box, from_decimal_string(margin_in));
      Row row;
      row.command = "certify " + target;
      row.d = std::to_string(nd);
      row.eps = eps_in;
      row.stage = rep.stage.empty() ? rep.method : rep.stage;
      row.bound_certified = fmt(rep.bound);
      row.bound_measured = fmt(rep.grid_sup);
      ok = rep.certified && (eps <= 0 || rep.bound < eps);
      row.status = rep.method == "measured_only" ? "measured-only (not certified)" : pass_fail(ok);
      rows.push_back(std::move(row));
    } else if (cmd == "lowerbound") {
      auto parse_list = [](const std::string& s, std::vector<std::string> fallback) {
        if (s.empty()) return fallback;
        std::vector<std::string> v;
        std::istringstream is(s);
        for (std::string tok; std::getline(is, tok, ',');) v.push_back(tok);
        return v;
      };
      if (!net_path.empty()) {
        NetworkValue net = deserialize(read_file(net_path));
        if (!std::holds_alternative<LayeredNetwork>(net))
          throw input_error("lowerbound needs a layered (ReLU) network");
        const LayeredNetwork& ln = std::get<LayeredNetwork>(net);
        LowerBoundCertificate cert = three_point_lower_bound(ln, d, kv);
        Row row;
        row.command = "lowerbound";
        row.d = std::to_string(d);
        row.k = k_in;
        row.L = std::to_string(ln.depth());
        row.eps = eps_in;
        row.neurons = std::to_string(ln.width());
        row.stage = "certificate";
        row.bound_certified = fmt(cert.implied_lower_bound);
        row.bound_measured = fmt(cert.gap);
        if (eps > 0) {
          const long long nmin = min_width_lower_bound(d, kv, eps, static_cast<unsigned>(ln.depth()));
          row.cap = std::to_string(nmin);
          row.status = ln.width() >= nmin ? "width admissible" : "width below n_min";
        } else {
          row.status = "certificate";
        }
        rows.push_back(std::move(row));
      } else {
        const auto ds = parse_list(d_list, {std::to_string(d)});
        const auto es = parse_list(eps_list, {eps_in});
        const auto Ls = parse_list(L_list, {std::to_string(L)});
        for (const auto& dv : ds)
          for (const auto& ev : es)
            for (const auto& Lv : Ls) {
              Row row;
              row.command = "lowerbound";
              row.d = dv;
              row.eps = ev;
              row.k = k_in;
              row.L = Lv;
              row.stage = "n_min";
              const long long nmin =
                  min_width_lower_bound(static_cast<unsigned>(std::stoul(dv)), kv,
                                        from_decimal_string(ev),
                                        static_cast<unsigned>(std::stoul(Lv)));
              row.neurons = std::to_string(nmin);
              row.status = "ok";
              rows.push_back(std::move(row));
            }
      }
    } else {
      throw input_error("unknown command: " + cmd);
    }
  } catch (const error& e) {
    Row row;
    row.command = cmd + (kind.empty() ? "" : " " + kind);
    row.eps = eps_in;
    row.status = std::string("error: ") + e.what();
    if (format == "csv") row.status = "error";
    rows.push_back(std::move(row));
    emit(rows, format, std::cout);
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  emit(rows, format, std::cout);
  return ok ? 0 : 1;
}
