// Command-line front end: phantom/mask generation, SPIRiT calibration,
// reconstruction, evaluation, and hyperparameter sweeps.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "mrrecon/calibration.hpp"
#include "mrrecon/io.hpp"
#include "mrrecon/metrics.hpp"
#include "mrrecon/phantom.hpp"
#include "mrrecon/recon.hpp"
#include "mrrecon/sampling.hpp"

namespace fs = std::filesystem;
using namespace mrr;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitSolver = 3;

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory: " + dir);
}

SensitivitySet load_maps(const std::string& path) {
  const ComplexArray a = read_array(path);
  if (a.rank() != 3) throw DataError("maps must be a (C, U, V) array: " + path);
  SensitivitySet s;
  s.maps = unstack_coils(a);
  return s;
}

ComplexArray load_data(const std::string& path) {
  const ComplexArray a = read_array(path);
  if (a.rank() != 3) throw DataError("k-space must be a (C, U, V) array: " + path);
  return a;
}

std::vector<double> load_gamma(const std::string& path) {
  const ComplexArray a = read_array(path);
  std::vector<double> g(a.data.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = a.data[i].real();
  return g;
}

ComplexArray kernels_to_array(const SpiritKernelSet& k) {
  const std::size_t side = k.side();
  ComplexArray a({k.coils, k.coils, side, side});
  std::size_t i = 0;
  for (std::size_t t = 0; t < k.coils; ++t)
    for (std::size_t c = 0; c < k.coils; ++c)
      for (std::size_t j = 0; j < side * side; ++j) a.data[i++] = k.taps[t][c][j];
  return a;
}

SpiritKernelSet kernels_from_array(const ComplexArray& a) {
  if (a.rank() != 4 || a.dims[0] != a.dims[1] || a.dims[2] != a.dims[3] ||
      a.dims[2] % 2 == 0)
    throw DataError("kernels must be a (C, C, 2R+1, 2R+1) array");
  SpiritKernelSet k = SpiritKernelSet::zeros(a.dims[0], int(a.dims[2] / 2));
  std::size_t i = 0;
  for (std::size_t t = 0; t < k.coils; ++t)
    for (std::size_t c = 0; c < k.coils; ++c)
      for (std::size_t j = 0; j < a.dims[2] * a.dims[3]; ++j)
        k.taps[t][c][j] = a.data[i++];
  return k;
}

void write_trace(const std::string& path, const SolverTrace& trace) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open for writing: " + path);
  for (const TracePoint& p : trace.points) {
    json line = {{"iter", p.iter},
                 {"objective", p.objective},
                 {"step", p.step},
                 {"residual", p.residual},
                 {"seconds", p.seconds}};
    os << line.dump() << "\n";
  }
}

std::vector<std::uint8_t> load_support(const std::string& path, std::size_t n) {
  const ComplexArray a = read_array(path);
  if (a.data.size() != n) throw DataError("support size mismatch: " + path);
  std::vector<std::uint8_t> omega(n);
  for (std::size_t i = 0; i < n; ++i)
    omega[i] = std::abs(a.data[i]) > 0.0 ? 1 : 0;
  return omega;
}

struct ReconArgs {
  std::string method = "pics";
  std::string kspace_path, maps_path, mask_path, kernels_path, gamma_path;
  std::string support_path, config_path, out_dir = ".";
  // flags override config-file values; optionals record what the user set
  std::optional<double> nu, lambda_s, kappa, sigma_sq;
  std::optional<std::size_t> iters;
};

int run_recon(const ReconArgs& a) {
  ReconConfig cfg;
  if (!a.config_path.empty()) {
    std::ifstream is(a.config_path);
    if (!is) throw DataError("cannot read config: " + a.config_path);
    cfg = config_from_json(json::parse(is));
  }
  if (a.nu) cfg.nu = *a.nu;
  if (a.lambda_s) cfg.lambda_s = *a.lambda_s;
  if (a.kappa) cfg.kappa = *a.kappa;
  if (a.iters) cfg.max_iters = *a.iters;
  if (a.sigma_sq) cfg.sigma_sq = *a.sigma_sq;

  const ComplexArray data = load_data(a.kspace_path);
  const SensitivitySet maps = load_maps(a.maps_path);
  const SamplingMask mask = read_mask(a.mask_path);
  if (!a.gamma_path.empty()) cfg.gamma = load_gamma(a.gamma_path);

  std::optional<SpiritKernelSet> kernels;
  if (!a.kernels_path.empty())
    kernels = kernels_from_array(read_array(a.kernels_path));

  ReconResult res;
  if (a.method == "pics") {
    res = recon_pics(data, maps, mask, cfg.nu, cfg.max_iters);
  } else if (a.method == "pics-sr") {
    res = recon_pics_sr(data, maps, mask, kernels ? &*kernels : nullptr, cfg);
  } else if (a.method == "pics-sr-support") {
    if (!kernels) throw DataError("pics-sr-support requires --kernels");
    if (a.support_path.empty()) throw DataError("pics-sr-support requires --support");
    cfg.support = load_support(a.support_path, mask.rows * mask.cols);
    if (!cfg.sigma_sq) throw DataError("pics-sr-support requires --sigma-sq");
    res = recon_pics_sr_support(data, maps, mask, *kernels, cfg);
  } else {
    throw DataError("unknown method: " + a.method);
  }

  ensure_dir(a.out_dir);
  write_array(join(a.out_dir, "image.mra"), res.image);
  write_trace(join(a.out_dir, "trace.jsonl"), res.trace);
  json summary = {{"method", a.method},
                  {"objective", res.objective},
                  {"iterations", res.trace.points.size()},
                  {"config", config_to_json(cfg)}};
  std::ofstream os(join(a.out_dir, "recon.json"));
  os << summary.dump(2) << "\n";
  std::cout << summary.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compressed-sensing parallel MRI reconstruction"};
  app.require_subcommand(1);

  // phantom
  auto* ph = app.add_subcommand("phantom", "Generate a synthetic phantom scene");
  std::size_t ph_size = 128, ph_coils = 8;
  std::uint64_t ph_seed = 0;
  double ph_noise = 0.0;
  std::string ph_out = ".";
  ph->add_option("--size", ph_size, "Grid size (square)");
  ph->add_option("--coils", ph_coils, "Number of coils");
  ph->add_option("--seed", ph_seed, "RNG seed");
  ph->add_option("--noise-std", ph_noise, "Per-component k-space noise std");
  ph->add_option("--out", ph_out, "Output directory");

  // mask
  auto* mk = app.add_subcommand("mask", "Generate a variable-density sampling mask");
  std::size_t mk_size = 128, mk_acr = 0;
  double mk_fraction = 0.25;
  std::uint64_t mk_seed = 0;
  std::string mk_out = ".";
  mk->add_option("--size", mk_size, "Grid size (square)");
  mk->add_option("--fraction", mk_fraction, "Target sample fraction");
  mk->add_option("--acr", mk_acr, "Auto-calibration region size (0 = default)");
  mk->add_option("--seed", mk_seed, "RNG seed");
  mk->add_option("--out", mk_out, "Output directory");

  // calibrate
  auto* cal = app.add_subcommand("calibrate",
                                 "Estimate interpolation kernels, spectrum fit, weights");
  std::string cal_kspace, cal_mask, cal_maps, cal_out = ".";
  int cal_radius = 2;
  cal->add_option("--kspace", cal_kspace, "Fully-sampled or masked k-space (C, U, V)")
      ->required();
  cal->add_option("--mask", cal_mask, "Sampling mask with ACR metadata")->required();
  cal->add_option("--maps", cal_maps, "Sensitivity maps, required for the balance constant");
  cal->add_option("--kernel-radius", cal_radius, "Kernel radius R (2R+1 square)");
  cal->add_option("--out", cal_out, "Output directory");

  // recon
  auto* rc = app.add_subcommand("recon", "Reconstruct an image from sampled k-space");
  ReconArgs ra;
  double rc_nu = 0, rc_ls = 0, rc_kappa = 0, rc_sigma = 0;
  std::size_t rc_iters = 0;
  rc->add_option("--method", ra.method, "pics | pics-sr | pics-sr-support")
      ->check(CLI::IsMember({"pics", "pics-sr", "pics-sr-support"}));
  rc->add_option("--kspace", ra.kspace_path, "Sampled k-space (C, U, V)")->required();
  rc->add_option("--maps", ra.maps_path, "Sensitivity maps (C, U, V)")->required();
  rc->add_option("--mask", ra.mask_path, "Sampling mask")->required();
  rc->add_option("--kernels", ra.kernels_path, "Calibrated kernels (C, C, 2R+1, 2R+1)");
  rc->add_option("--gamma", ra.gamma_path, "Per-frequency weights (centered)");
  rc->add_option("--support", ra.support_path, "Support mask image");
  rc->add_option("--config", ra.config_path, "JSON config; flags override");
  auto* o_nu = rc->add_option("--nu", rc_nu, "l1 weight");
  auto* o_ls = rc->add_option("--lambda-s", rc_ls, "Interpolation-residual weight");
  auto* o_k = rc->add_option("--kappa", rc_kappa, "Term balance constant");
  auto* o_it = rc->add_option("--iters", rc_iters, "Iteration budget");
  auto* o_sg = rc->add_option("--sigma-sq", rc_sigma, "Background energy bound");
  rc->add_option("--out", ra.out_dir, "Output directory");

  // eval
  auto* ev = app.add_subcommand("eval", "Compare an image against a reference");
  std::string ev_image, ev_ref;
  ev->add_option("--image", ev_image, "Reconstructed image")->required();
  ev->add_option("--ref", ev_ref, "Reference image")->required();

  // sweep
  auto* sw = app.add_subcommand("sweep", "Grid search over the regularization weights");
  std::size_t sw_size = 64, sw_coils = 4, sw_acr = 0, sw_iters = 100;
  double sw_fraction = 0.25, sw_noise = 0.0;
  std::uint64_t sw_seed = 0;
  std::string sw_out;
  std::vector<double> sw_nus = {0.01, 0.1, 1.0, 10.0};
  std::vector<double> sw_lss = {0.1, 0.5, 1.0, 2.0, 4.0, 5.0, 10.0};
  sw->add_option("--size", sw_size, "Grid size (square)");
  sw->add_option("--coils", sw_coils, "Number of coils");
  sw->add_option("--fraction", sw_fraction, "Target sample fraction");
  sw->add_option("--acr", sw_acr, "ACR size (0 = default)");
  sw->add_option("--seed", sw_seed, "RNG seed");
  sw->add_option("--noise-std", sw_noise, "Per-component k-space noise std");
  sw->add_option("--iters", sw_iters, "Iterations per grid point");
  sw->add_option("--nu-grid", sw_nus, "l1 weight grid");
  sw->add_option("--lambda-s-grid", sw_lss, "Interpolation weight grid");
  sw->add_option("--out", sw_out, "Write the JSON table here (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (ph->parsed()) {
      const ComplexArray img =
          to_complex(shepp_logan(ph_size, ph_size), ph_size, ph_size);
      const SensitivitySet maps = birdcage_maps(ph_size, ph_size, ph_coils);
      const auto kspace = simulate_kspace(img, maps, ph_noise, ph_seed);
      ensure_dir(ph_out);
      write_array(join(ph_out, "img.mra"), img);
      write_array(join(ph_out, "maps.mra"), stack_coils(maps.maps));
      write_array(join(ph_out, "kspace.mra"), stack_coils(kspace));
      return kExitOk;
    }

    if (mk->parsed()) {
      if (mk_acr == 0) mk_acr = default_acr_size(mk_size, mk_size, 4).first;
      const SamplingMask mask =
          generate_mask(mk_size, mk_size, mk_fraction, mk_acr, mk_acr, mk_seed);
      ensure_dir(mk_out);
      write_mask(join(mk_out, "mask.mra"), mask);
      json info = {{"fraction", mask.sample_fraction()}, {"acr_size", mk_acr}};
      std::cout << info.dump(2) << "\n";
      return kExitOk;
    }

    if (cal->parsed()) {
      const ComplexArray stacked = load_data(cal_kspace);
      const SamplingMask mask = read_mask(cal_mask);
      const auto kspace = unstack_coils(stacked);
      const auto acr = extract_acr(kspace, mask);
      const SpiritKernelSet kernels = estimate_kernels(acr, cal_radius);
      const PowerLawFit fit = fit_power_law(kspace, mask);
      const FrequencyGrid grid(mask.rows, mask.cols);
      const auto gamma = gamma_weights(fit, grid);

      ensure_dir(cal_out);
      write_array(join(cal_out, "kernels.mra"), kernels_to_array(kernels));
      ComplexArray g({mask.rows, mask.cols});
      for (std::size_t i = 0; i < gamma.size(); ++i)
        g.data[i] = cplx{gamma[i], 0.0};
      write_array(join(cal_out, "gamma.mra"), g);

      json meta = {{"kernel_radius", cal_radius},
                   {"m_L", fit.m_L},
                   {"p_L", fit.p_L},
                   {"m_H", fit.m_H},
                   {"p_H", fit.p_H},
                   {"p0", fit.p0}};
      if (!cal_maps.empty()) {
        const SensitivitySet maps = load_maps(cal_maps);
        const EncodingOperator enc(maps, mask);
        const SpiritOperator spirit(kernels, maps);
        const double kappa = estimate_kappa(
            [&](const ComplexArray& m) { return spirit.forward(m); },
            [&](const ComplexArray& y) { return spirit.adjoint(y); },
            [&](const ComplexArray& m) { return enc.forward(m); },
            [&](const ComplexArray& y) { return enc.adjoint(y); },
            {mask.rows, mask.cols});
        meta["kappa"] = kappa;
      }
      std::ofstream os(join(cal_out, "calibration.json"));
      os << meta.dump(2) << "\n";
      std::cout << meta.dump(2) << "\n";
      return kExitOk;
    }

    if (rc->parsed()) {
      if (*o_nu) ra.nu = rc_nu;
      if (*o_ls) ra.lambda_s = rc_ls;
      if (*o_k) ra.kappa = rc_kappa;
      if (*o_it) ra.iters = rc_iters;
      if (*o_sg) ra.sigma_sq = rc_sigma;
      return run_recon(ra);
    }

    if (ev->parsed()) {
      const ComplexArray img = read_array(ev_image);
      const ComplexArray ref = read_array(ev_ref);
      if (img.dims != ref.dims) throw DataError("eval: shape mismatch");
      const double p = psnr_complex(img, ref);
      json out = {{"ssim", ssim(img, ref)}};
      if (std::isinf(p))
        out["psnr_db"] = "inf";
      else
        out["psnr_db"] = p;
      std::cout << out.dump(2) << "\n";
      return kExitOk;
    }

    if (sw->parsed()) {
      if (sw_acr == 0)
        sw_acr = std::max<std::size_t>(default_acr_size(sw_size, sw_size, 4).first, 16);
      const ComplexArray img =
          to_complex(shepp_logan(sw_size, sw_size), sw_size, sw_size);
      const SensitivitySet maps = birdcage_maps(sw_size, sw_size, sw_coils);
      const auto kspace = simulate_kspace(img, maps, sw_noise, sw_seed);
      const ComplexArray reference = recon_reference(kspace, maps);
      const SamplingMask mask =
          generate_mask(sw_size, sw_size, sw_fraction, sw_acr, sw_acr, sw_seed);
      const EncodingOperator enc(maps, mask);
      ComplexArray data = stack_coils(kspace);
      // keep only the sampled entries
      {
        ComplexArray centered_mask({mask.rows, mask.cols});
        for (std::size_t i = 0; i < centered_mask.data.size(); ++i)
          centered_mask.data[i] = cplx{mask.collected[i] ? 1.0 : 0.0, 0.0};
        const ComplexArray mu = ifftshift2(centered_mask);
        const std::size_t n = mask.rows * mask.cols;
        for (std::size_t c = 0; c < sw_coils; ++c)
          for (std::size_t i = 0; i < n; ++i)
            if (mu.data[i].real() == 0.0) data.data[c * n + i] = cplx{0.0, 0.0};
      }
      const auto acr = extract_acr(kspace, mask);
      const SpiritKernelSet kernels = estimate_kernels(acr, 2);
      const PowerLawFit fit = fit_power_law(kspace, mask);
      const auto gamma = gamma_weights(fit, FrequencyGrid(mask.rows, mask.cols));
      const SpiritOperator spirit(kernels, maps);
      const double kappa = estimate_kappa(
          [&](const ComplexArray& m) { return spirit.forward(m); },
          [&](const ComplexArray& y) { return spirit.adjoint(y); },
          [&](const ComplexArray& m) { return enc.forward(m); },
          [&](const ComplexArray& y) { return enc.adjoint(y); },
          {mask.rows, mask.cols});

      json rows = json::array();
      json best;
      double best_ssim = -2.0;
      for (double nu : sw_nus)
        for (double ls : sw_lss) {
          ReconConfig cfg;
          cfg.nu = nu;
          cfg.lambda_s = ls;
          cfg.kappa = kappa;
          cfg.gamma = gamma;
          cfg.max_iters = sw_iters;
          const ReconResult r = recon_pics_sr(data, maps, mask, &kernels, cfg);
          const double s = ssim(r.image, reference);
          const double p = psnr_complex(r.image, reference);
          json row = {{"nu", nu}, {"lambda_s", ls}, {"ssim", s}, {"psnr_db", p}};
          rows.push_back(row);
          if (s > best_ssim) {
            best_ssim = s;
            best = row;
          }
        }
      json table = {{"rows", rows}, {"best", best}};
      if (sw_out.empty()) {
        std::cout << table.dump(2) << "\n";
      } else {
        std::ofstream os(sw_out);
        if (!os) throw DataError("cannot open for writing: " + sw_out);
        os << table.dump(2) << "\n";
        std::cout << best.dump(2) << "\n";
      }
      return kExitOk;
    }
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const IoError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const CalibrationError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const MaskGenError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
