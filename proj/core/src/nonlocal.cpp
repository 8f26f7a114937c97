#include "nlperim/nonlocal.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>

#include "nlperim/slicing.hpp"

namespace nlperim {

namespace {

std::mutex g_fftw_mutex;

int next_smooth(int n) {
    for (int m = n;; ++m) {
        int r = m;
        for (int p : {2, 3, 5}) {
            while (r % p == 0) r /= p;
        }
        if (r == 1) return m;
    }
}

// Zero-padded 2D autocorrelation of `field` (nx x ny row-major, row stride nx).
// out(di, dj) = sum_x field(x) field(x + d), |di| <= nx-1, |dj| <= ny-1.
std::vector<double> autocorrelation_fft(const std::vector<double>& field, int nx, int ny) {
    int px = next_smooth(2 * nx);
    int py = next_smooth(2 * ny);
    std::size_t nreal = static_cast<std::size_t>(px) * py;
    std::size_t ncplx = static_cast<std::size_t>(py) * (px / 2 + 1);

    double* in = fftw_alloc_real(nreal);
    fftw_complex* spec = fftw_alloc_complex(ncplx);
    std::fill(in, in + nreal, 0.0);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            in[static_cast<std::size_t>(j) * px + i] =
                field[static_cast<std::size_t>(j) * nx + i];
        }
    }
    fftw_plan fwd, bwd;
    {
        std::lock_guard<std::mutex> lock(g_fftw_mutex);
        fwd = fftw_plan_dft_r2c_2d(py, px, in, spec, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_c2r_2d(py, px, spec, in, FFTW_ESTIMATE);
    }
    fftw_execute(fwd);
    for (std::size_t i = 0; i < ncplx; ++i) {
        double re = spec[i][0], im = spec[i][1];
        spec[i][0] = re * re + im * im;
        spec[i][1] = 0.0;
    }
    fftw_execute(bwd);
    double scale = 1.0 / (static_cast<double>(px) * py);

    int mx = nx - 1, my = ny - 1;
    std::vector<double> out(static_cast<std::size_t>(2 * mx + 1) * (2 * my + 1), 0.0);
    for (int dj = -my; dj <= my; ++dj) {
        int jj = (dj + py) % py;
        for (int di = -mx; di <= mx; ++di) {
            int ii = (di + px) % px;
            out[static_cast<std::size_t>(dj + my) * (2 * mx + 1) + (di + mx)] =
                in[static_cast<std::size_t>(jj) * px + ii] * scale;
        }
    }
    {
        std::lock_guard<std::mutex> lock(g_fftw_mutex);
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
    }
    fftw_free(in);
    fftw_free(spec);
    return out;
}

std::vector<double> autocorrelation_direct(const std::vector<double>& field, int nx, int ny) {
    if (std::max(nx, ny) > 96)
        throw std::invalid_argument("direct covariogram: grid exceeds the 96-per-axis cost guard");
    int mx = nx - 1, my = ny - 1;
    std::vector<double> out(static_cast<std::size_t>(2 * mx + 1) * (2 * my + 1), 0.0);
    for (int dj = 0; dj <= my; ++dj) {
        for (int di = -mx; di <= mx; ++di) {
            if (dj == 0 && di < 0) continue;  // fill by symmetry
            double s = 0.0;
            int i0 = std::max(0, -di), i1 = nx - 1 - std::max(0, di);
            int j0 = std::max(0, -dj), j1 = ny - 1 - std::max(0, dj);
            for (int j = j0; j <= j1; ++j) {
                const double* row = field.data() + static_cast<std::size_t>(j) * nx;
                const double* row2 = field.data() + static_cast<std::size_t>(j + dj) * nx + di;
                for (int i = i0; i <= i1; ++i) s += row[i] * row2[i];
            }
            out[static_cast<std::size_t>(dj + my) * (2 * mx + 1) + (di + mx)] = s;
            out[static_cast<std::size_t>(-dj + my) * (2 * mx + 1) + (-di + mx)] = s;
        }
    }
    return out;
}

CovGrid build_cov(std::vector<double> field, int nx, int ny, double h, CovRoute route,
                  bool binary) {
    std::vector<double> ac = route == CovRoute::fft ? autocorrelation_fft(field, nx, ny)
                                                    : autocorrelation_direct(field, nx, ny);
    CovGrid g;
    g.h = h;
    g.mx = nx - 1;
    g.my = ny - 1;
    g.v.resize(ac.size());
    double h2 = h * h;
    double A = 0.0;
    for (double a : field) A += a;
    g.set_measure = A * h2;
    g.from_binary = binary;
    for (std::size_t i = 0; i < ac.size(); ++i) {
        double c = ac[i];
        if (binary) c = std::round(c);  // pair counts are exact integers
        g.v[i] = c * h2;
    }
    return g;
}

struct WeightTable {
    int cells = 0;
    double h = 0.0;
    std::vector<double> w;  // (cells+1)^2, index |di| + (cells+1) |dj|
    double at(int adi, int adj) const {
        return w[static_cast<std::size_t>(adj) * (cells + 1) + adi];
    }
};

// Pair-averaged kernel weight: mean of G_eps over two cells at lattice offset
// (di, dj), i.e. the tent-smoothed kernel times h^2.
double tent_average(const RadialKernel& geps, double h, int adi, int adj) {
    static const double gx[12] = {-0.9815606342467192, -0.9041172563704748, -0.7699026741943047,
                                  -0.5873179542866175, -0.3678314989981802, -0.1252334085114689,
                                  0.1252334085114689,  0.3678314989981802,  0.5873179542866175,
                                  0.7699026741943047,  0.9041172563704748,  0.9815606342467192};
    static const double gw[12] = {0.0471753363865118, 0.1069393259953184, 0.1600783285433462,
                                  0.2031674267230659, 0.2334925365383548, 0.2491470458134028,
                                  0.2491470458134028, 0.2334925365383548, 0.2031674267230659,
                                  0.1600783285433462, 0.1069393259953184, 0.0471753363865118};
    double zx = adi * h, zy = adj * h;
    double total = 0.0;
    // quadrants of the tent support [-h, h]^2
    for (int qx : {-1, 1}) {
        for (int qy : {-1, 1}) {
            double s = 0.0;
            for (int a = 0; a < 12; ++a) {
                double sx = 0.5 * h * (gx[a] + 1.0);  // in [0, h]
                double wx = 0.5 * h * gw[a] * (1.0 - sx / h);
                for (int b = 0; b < 12; ++b) {
                    double sy = 0.5 * h * (gx[b] + 1.0);
                    double wy = 0.5 * h * gw[b] * (1.0 - sy / h);
                    double r = std::hypot(zx + qx * sx, zy + qy * sy);
                    s += wx * wy * geps.profile(r);
                }
            }
            total += s;
        }
    }
    return total / (h * h);  // normalized tent; result has kernel units
}

// Exact-moment sums over the union of cells whose centers lie inside the
// model radius; the model and the lattice then tile the plane exactly.
struct NearMoments {
    double s1 = 0.0;  // sum over model cells of \int_cell |z| G_eps
    double s3 = 0.0;  //                        \int_cell |z|^3 G_eps
};

NearMoments near_moments(const RadialKernel& geps, double h, double r_model) {
    NearMoments out;
    static const double gx16[8] = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                                   0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                                   0.9445750230732326, 0.9894009349916499};
    static const double gw16[8] = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                                   0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                                   0.0622535239386479, 0.0271524594117541};
    auto cell_moment = [&](double cx, double cy, int m) {
        // tensor Gauss-16 over the cell; fine for cells away from the origin
        double s = 0.0;
        for (int a = 0; a < 16; ++a) {
            double xa = (a < 8) ? -gx16[a - 0] : gx16[a - 8];
            double wa = (a < 8) ? gw16[a] : gw16[a - 8];
            double x = cx + 0.5 * h * xa;
            for (int b = 0; b < 16; ++b) {
                double xb = (b < 8) ? -gx16[b] : gx16[b - 8];
                double wb = (b < 8) ? gw16[b] : gw16[b - 8];
                double y = cy + 0.5 * h * xb;
                double r = std::hypot(x, y);
                s += wa * wb * std::pow(r, m) * geps.profile(r);
            }
        }
        return s * 0.25 * h * h;
    };
    auto origin_cell_moment = [&](int m) {
        // polar: the radial part has a closed form, the angle is smooth
        double s = 0.0;
        for (int a = 0; a < 16; ++a) {
            double t0 = (a < 8) ? -gx16[a] : gx16[a - 8];
            double w = (a < 8) ? gw16[a] : gw16[a - 8];
            double theta = kPi / 8.0 * (t0 + 1.0);  // [0, pi/4], 8-fold symmetry
            double R = 0.5 * h / std::cos(theta);
            MomentValue mv = geps.profile_power_integral(m + 1.0, 0.0, R);
            s += w * mv.value;
        }
        return s * kPi;
    };
    int K = static_cast<int>(std::floor(r_model / h)) + 1;
    for (int dj = -K; dj <= K; ++dj) {
        for (int di = -K; di <= K; ++di) {
            double r = h * std::hypot(di, dj);
            if (r > r_model) continue;
            if (di == 0 && dj == 0) {
                out.s1 += origin_cell_moment(1);
                out.s3 += origin_cell_moment(3);
            } else {
                out.s1 += cell_moment(di * h, dj * h, 1);
                out.s3 += cell_moment(di * h, dj * h, 3);
            }
        }
    }
    return out;
}

std::mutex g_table_mutex;
std::map<std::string, std::shared_ptr<WeightTable>> g_table_cache;
std::map<std::string, NearMoments> g_near_cache;

NearMoments near_moments_cached(const RadialKernel& k, double eps, double h, double r_model) {
    std::string key = k.family() + "/" + std::to_string(k.scale()) + "/" +
                      std::to_string(eps) + "/" + std::to_string(h) + "/" +
                      std::to_string(r_model);
    for (const auto& [name, val] : k.params()) key += "/" + name + "=" + std::to_string(val);
    {
        std::lock_guard<std::mutex> lock(g_table_mutex);
        auto it = g_near_cache.find(key);
        if (it != g_near_cache.end()) return it->second;
    }
    NearMoments nm = near_moments(rescale(k, eps), h, r_model);
    {
        std::lock_guard<std::mutex> lock(g_table_mutex);
        g_near_cache[key] = nm;
    }
    return nm;
}

std::shared_ptr<WeightTable> weight_table(const RadialKernel& k, double eps, double h,
                                          int cells) {
    std::string key = k.family() + "/" + std::to_string(k.scale()) + "/" +
                      std::to_string(k.dimension()) + "/" + std::to_string(eps) + "/" +
                      std::to_string(h) + "/" + std::to_string(cells);
    for (const auto& [name, val] : k.params()) key += "/" + name + "=" + std::to_string(val);
    {
        std::lock_guard<std::mutex> lock(g_table_mutex);
        auto it = g_table_cache.find(key);
        if (it != g_table_cache.end()) return it->second;
    }
    auto t = std::make_shared<WeightTable>();
    t->cells = cells;
    t->h = h;
    t->w.assign(static_cast<std::size_t>(cells + 1) * (cells + 1), 0.0);
    RadialKernel geps = rescale(k, eps);
    for (int adj = 0; adj <= cells; ++adj) {
        for (int adi = 0; adi <= cells; ++adi) {
            if (adi == 0 && adj == 0) continue;  // inside the model radius anyway
            t->w[static_cast<std::size_t>(adj) * (cells + 1) + adi] =
                tent_average(geps, h, adi, adj);
        }
    }
    {
        std::lock_guard<std::mutex> lock(g_table_mutex);
        g_table_cache[key] = t;
    }
    return t;
}

}  // namespace

CovGrid covariogram(const PixelSet& p, CovRoute route) {
    std::vector<double> field(p.occ.size());
    for (std::size_t i = 0; i < p.occ.size(); ++i) field[i] = p.occ[i] ? 1.0 : 0.0;
    CovGrid g = build_cov(std::move(field), p.nx, p.ny, p.h, route, /*binary=*/true);
    return g;
}

CovGrid covariogram(const FracField& f, CovRoute route) {
    return build_cov(f.a, f.nx, f.ny, f.h, route, /*binary=*/false);
}

namespace {

WindowPairSums build_sat(const std::vector<double>& field, int nx, int ny, double h) {
    WindowPairSums r;
    r.nx = nx;
    r.ny = ny;
    r.h2 = h * h;
    r.sat.assign(static_cast<std::size_t>(nx + 1) * (ny + 1), 0.0);
    for (int j = 0; j < ny; ++j) {
        double row = 0.0;
        for (int i = 0; i < nx; ++i) {
            row += field[static_cast<std::size_t>(j) * nx + i];
            r.sat[static_cast<std::size_t>(j + 1) * (nx + 1) + (i + 1)] =
                r.sat[static_cast<std::size_t>(j) * (nx + 1) + (i + 1)] + row;
        }
    }
    return r;
}

}  // namespace

PeriValue assemble_nonlocal_perimeter(const CovGrid& cov, const RadialKernel& k, double eps,
                                      const PeriOptions& opt) {
    if (!(eps > 0.0)) throw std::domain_error("nonlocal perimeter: eps <= 0");
    PeriValue out;
    out.evaluator = "correlation";
    if (cov.set_measure <= 0.0) return out;

    const double h = cov.h;
    const double A = cov.set_measure;
    KernelCalculus calc(k, eps);
    RadialKernel geps = rescale(k, eps);
    const double h2 = h * h;

    auto pair_mass = [&](int di, int dj) {
        if (opt.window_restricted) {
            if (!cov.restricted) throw std::logic_error("covariogram lacks window pair sums");
            return cov.restricted->overlap_sum(di, dj) +
                   cov.restricted->overlap_sum(-di, -dj) - 2.0 * cov.at(di, dj);
        }
        return cov.sym_diff(di, dj);
    };

    if (opt.scheme == PeriScheme::midpoint) {
        double s = 0.0;
        for (int dj = -cov.my; dj <= cov.my; ++dj) {
            for (int di = -cov.mx; di <= cov.mx; ++di) {
                if (di == 0 && dj == 0) continue;  // u(0) = 0: singular cell dropped
                double g = geps.profile(h * std::hypot(di, dj));
                if (g == 0.0) continue;
                s += pair_mass(di, dj) * g * h2;
            }
        }
        out.value = out.lattice = s;
        // dominant midpoint defect: the dropped near-origin first-moment mass
        double slope = 0.0;
        int cnt = 0;
        for (int dj = -1; dj <= 1; ++dj) {
            for (int di = -1; di <= 1; ++di) {
                if (di == 0 && dj == 0) continue;
                double r = h * std::hypot(di, dj);
                slope += pair_mass(di, dj) / r;
                ++cnt;
            }
        }
        slope /= std::max(1, cnt);
        out.err = slope * calc.ball_moment(1, 1.5 * h);
        out.window_exact = false;
        return out;
    }

    // refined scheme
    double rho_win = h * std::min(cov.mx, cov.my);
    double r_model = std::max(opt.r_model_eps_factor * eps,
                              static_cast<double>(opt.r_model_min_cells) * h);
    if (opt.fit_factor * r_model > 0.9 * rho_win) {
        r_model = 0.9 * rho_win / opt.fit_factor;
    }
    bool model_ok = r_model >= opt.r_model_min_cells * h;

    double phi_bar = 0.0, phi_quad = 0.0, resid = 0.0;
    double near = 0.0;
    double r_fit_hi = opt.fit_factor * r_model;
    bool have_hint = opt.boundary_hint.has_value();
    if (model_ok) {
        // u(z)/|z| ~ a + b |z|^2 on the fit annulus. With a boundary-length
        // hint the linear coefficient is pinned at a = (2/pi) L and only the
        // curvature correction b is fitted.
        double s1 = 0.0, sr2 = 0.0, sr4 = 0.0, ss = 0.0, ssr2 = 0.0;
        long npts = 0;
        int lo = static_cast<int>(std::floor(-r_fit_hi / h));
        int hi = -lo;
        for (int dj = std::max(lo, -cov.my); dj <= std::min(hi, cov.my); ++dj) {
            for (int di = std::max(lo, -cov.mx); di <= std::min(hi, cov.mx); ++di) {
                double r = h * std::hypot(di, dj);
                if (r <= r_model || r > r_fit_hi) continue;
                double s = pair_mass(di, dj) / r;
                double r2 = r * r;
                s1 += 1.0;
                sr2 += r2;
                sr4 += r2 * r2;
                ss += s;
                ssr2 += s * r2;
                ++npts;
            }
        }
        if (npts >= 8) {
            if (have_hint) {
                phi_bar = 2.0 / kPi * *opt.boundary_hint;
                phi_quad = (ssr2 - phi_bar * sr2) / sr4;
            } else {
                double det = s1 * sr4 - sr2 * sr2;
                if (std::abs(det) > 1e-30) {
                    phi_bar = (ss * sr4 - ssr2 * sr2) / det;
                    phi_quad = (s1 * ssr2 - sr2 * ss) / det;
                } else {
                    phi_bar = ss / s1;
                }
            }
            double sq = 0.0;
            for (int dj = std::max(lo, -cov.my); dj <= std::min(hi, cov.my); ++dj) {
                for (int di = std::max(lo, -cov.mx); di <= std::min(hi, cov.mx); ++di) {
                    double r = h * std::hypot(di, dj);
                    if (r <= r_model || r > r_fit_hi) continue;
                    double s = pair_mass(di, dj) / r;
                    double e = s - (phi_bar + phi_quad * r * r);
                    sq += e * e;
                }
            }
            resid = std::sqrt(sq / static_cast<double>(npts));
            NearMoments nm = near_moments_cached(k, eps, h, r_model);
            near = std::max(0.0, phi_bar * nm.s1 + phi_quad * nm.s3);
        } else {
            model_ok = false;
        }
    }
    if (!model_ok) r_model = 0.0;

    auto table = weight_table(k, eps, h, opt.tent_cells);
    double r_tent = opt.tent_cells * h;
    // Pair-averaged (tent) weights spread one cell beyond their center; a
    // midpoint buffer band outside the model disc keeps that smearing from
    // double counting mass already covered by the near-field model.
    double r_band = model_ok ? r_model + opt.band_cells * h : 0.0;
    double lattice = 0.0;
    for (int dj = -cov.my; dj <= cov.my; ++dj) {
        for (int di = -cov.mx; di <= cov.mx; ++di) {
            if (di == 0 && dj == 0) continue;
            double r = h * std::hypot(di, dj);
            if (r <= r_model || r > rho_win) continue;
            double w;
            if (r <= r_band || r > r_tent) {
                w = geps.profile(r) * h2;
            } else {
                w = table->at(std::abs(di), std::abs(dj)) * h2;
            }
            if (w == 0.0) continue;
            lattice += pair_mass(di, dj) * w;
        }
    }

    double tail = 0.0, tail_err = 0.0;
    bool window_exact = true;
    if (!opt.window_restricted) {
        // largest offset radius with any overlap mass: beyond it u = 2|E|
        double r_cov = 0.0;
        for (int dj = -cov.my; dj <= cov.my; ++dj) {
            for (int di = -cov.mx; di <= cov.mx; ++di) {
                if (cov.at(di, dj) > 1e-12 * A) {
                    r_cov = std::max(r_cov, h * std::hypot(di, dj));
                }
            }
        }
        double ext = calc.exterior_mass(rho_win);
        tail = 2.0 * A * ext;
        if (r_cov + h > rho_win) {
            window_exact = false;
            tail_err = tail;  // overlap may extend past the window: tail uncertain
        }
    } else {
        window_exact = false;
    }

    out.value = near + lattice + tail;
    out.near_field = near;
    out.lattice = lattice;
    out.tail = tail;
    out.phi_bar = phi_bar;
    out.phi_quad = phi_quad;
    out.fit_residual = resid;
    out.window_exact = window_exact;

    double err = tail_err;
    if (model_ok) {
        double m1 = calc.ball_moment(1, r_model);
        double m3 = calc.ball_moment(3, r_model);
        err += resid * m3 / std::max(r_model * r_model, 1e-300);  // curvature-fit spread
        // angular variation of the slope against the ragged model ring
        double ring = calc.ball_moment(1, r_model + h) -
                      calc.ball_moment(1, std::max(0.0, r_model - h));
        err += resid * ring;
        if (!have_hint) {
            double aniso = cov.from_binary ? (h / r_fit_hi) : (h / r_fit_hi) * (h / r_fit_hi);
            err += aniso * near + resid * m1;
        }
        // midpoint buffer band: kernel curvature error over the band mass
        double band_mass = std::abs(phi_bar) * (calc.ball_moment(1, r_band) - m1);
        err += 0.5 * (h / std::max(r_model, h)) * (h / std::max(r_model, h)) * band_mass;
    } else if (opt.scheme == PeriScheme::refined) {
        err += 0.5 * std::abs(lattice) * (h / eps);
    }
    err += (h / eps) * (h / eps) * std::abs(lattice) * 0.1;
    out.err = err;
    if (opt.strict_window && !window_exact && tail_err > 1e-10 * std::max(out.value, 1e-300)) {
        throw std::runtime_error(
            "nonlocal perimeter: window margin too small for the kernel tail");
    }
    return out;
}

PeriValue nonlocal_perimeter_correlation(const PixelSet& p, const RadialKernel& k, double eps,
                                         const PeriOptions& opt) {
    CovGrid g = covariogram(p, CovRoute::fft);
    if (opt.window_restricted) {
        std::vector<double> field(p.occ.size());
        for (std::size_t i = 0; i < p.occ.size(); ++i) field[i] = p.occ[i] ? 1.0 : 0.0;
        g.restricted = std::make_shared<WindowPairSums>(build_sat(field, p.nx, p.ny, p.h));
    }
    PeriValue v = assemble_nonlocal_perimeter(g, k, eps, opt);
    v.evaluator = "correlation";
    return v;
}

PeriValue nonlocal_perimeter_correlation(const FracField& f, const RadialKernel& k, double eps,
                                         const PeriOptions& opt) {
    CovGrid g = covariogram(f, CovRoute::fft);
    if (opt.window_restricted) {
        g.restricted = std::make_shared<WindowPairSums>(build_sat(f.a, f.nx, f.ny, f.h));
    }
    PeriValue v = assemble_nonlocal_perimeter(g, k, eps, opt);
    v.evaluator = "correlation";
    return v;
}

PeriValue nonlocal_perimeter_direct(const PixelSet& p, const RadialKernel& k, double eps,
                                    const PeriOptions& opt) {
    CovGrid g = covariogram(p, CovRoute::direct);
    if (opt.window_restricted) {
        std::vector<double> field(p.occ.size());
        for (std::size_t i = 0; i < p.occ.size(); ++i) field[i] = p.occ[i] ? 1.0 : 0.0;
        g.restricted = std::make_shared<WindowPairSums>(build_sat(field, p.nx, p.ny, p.h));
    }
    PeriValue v = assemble_nonlocal_perimeter(g, k, eps, opt);
    v.evaluator = "direct";
    return v;
}

PeriValue nonlocal_perimeter_direct(const FracField& f, const RadialKernel& k, double eps,
                                    const PeriOptions& opt) {
    CovGrid g = covariogram(f, CovRoute::direct);
    if (opt.window_restricted) {
        g.restricted = std::make_shared<WindowPairSums>(build_sat(f.a, f.nx, f.ny, f.h));
    }
    PeriValue v = assemble_nonlocal_perimeter(g, k, eps, opt);
    v.evaluator = "direct";
    return v;
}

PeriValue polygon_nonlocal_perimeter(const PolygonSet& e, const RadialKernel& k, double eps,
                                     const RasterPolicy& policy) {
    double h = policy.h_for(eps);
    BBox b = e.bbox();
    double diam = b.diag();
    double need = std::max(0.0, diam - std::min(b.width(), b.height()));
    double margin = 0.5 * need + policy.extra_margin_cells * h;
    FracField f = rasterize_fractional(e, h, margin);
    PeriOptions opt;
    opt.scheme = PeriScheme::refined;
    opt.boundary_hint = e.perimeter();
    return nonlocal_perimeter_correlation(f, k, eps, opt);
}

EnergyBreakdown energy(const PolygonSet& e, const RadialKernel& k, double eps, double gamma,
                       Evaluator evaluator, const RasterPolicy& policy) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::domain_error("energy: gamma not in [0,1)");
    EnergyBreakdown out;
    out.perimeter = e.perimeter();
    out.gamma = gamma;
    switch (evaluator) {
        case Evaluator::correlation: {
            PeriValue v = polygon_nonlocal_perimeter(e, k, eps, policy);
            out.nonlocal = v.value;
            out.err = gamma * v.err;
            out.evaluator = "correlation";
            break;
        }
        case Evaluator::direct: {
            double h = policy.h_for(eps);
            BBox b = e.bbox();
            double margin = 0.5 * std::max(0.0, b.diag() - std::min(b.width(), b.height())) +
                            policy.extra_margin_cells * h;
            FracField f = rasterize_fractional(e, h, margin);
            PeriOptions opt;
            opt.boundary_hint = e.perimeter();
            PeriValue v = nonlocal_perimeter_direct(f, k, eps, opt);
            out.nonlocal = v.value;
            out.err = gamma * v.err;
            out.evaluator = "direct";
            break;
        }
        case Evaluator::sliced: {
            SliceSampling s;
            s.n_dirs = 512;
            s.n_offsets = 512;
            SlicedEstimate est = sliced_perimeter_estimate(e, k, eps, s);
            out.nonlocal = est.nonlocal;
            out.err = gamma * 3.0 * est.nonlocal_stderr;
            out.evaluator = "sliced";
            break;
        }
    }
    out.value = out.perimeter - gamma * out.nonlocal;
    return out;
}

namespace {

namespace bg = boost::geometry;
using BPoint = bg::model::d2::point_xy<double>;
using BPoly = bg::model::polygon<BPoint, false, true>;  // ccw, closed
using BMulti = bg::model::multi_polygon<BPoly>;

BPoly to_boost(const PolygonSet& e) {
    BPoly p;
    for (const Vec2& v : e.vertices()) bg::append(p.outer(), BPoint(v.x, v.y));
    bg::append(p.outer(), BPoint(e.vertices()[0].x, e.vertices()[0].y));
    bg::correct(p);
    return p;
}

}  // namespace

SymDiffStats symmetric_difference_stats(const PolygonSet& e, const PolygonSet& f) {
    BMulti out;
    bg::sym_difference(to_boost(e), to_boost(f), out);
    SymDiffStats s;
    s.area = bg::area(out);
    s.perimeter = bg::perimeter(out);
    return s;
}

double intersection_area(const PolygonSet& e, const PolygonSet& f) {
    BMulti out;
    bg::intersection(to_boost(e), to_boost(f), out);
    return bg::area(out);
}

DifferenceBoundsReport check_difference_bounds(const PolygonSet& e, const PolygonSet& f,
                                               const RadialKernel& k, double eps, double s0,
                                               const RasterPolicy& policy) {
    DifferenceBoundsReport rep;
    double h = policy.h_for(eps);
    BBox be = e.bbox(), bf = f.bbox();
    BBox all{{std::min(be.lo.x, bf.lo.x), std::min(be.lo.y, bf.lo.y)},
             {std::max(be.hi.x, bf.hi.x), std::max(be.hi.y, bf.hi.y)}};
    double margin = 0.5 * std::max(0.0, all.diag() - std::min(all.width(), all.height())) +
                    policy.extra_margin_cells * h;
    Vec2 origin{all.lo.x - margin, all.lo.y - margin};
    int nx = static_cast<int>(std::ceil((all.width() + 2 * margin) / h)) + 1;
    int ny = static_cast<int>(std::ceil((all.height() + 2 * margin) / h)) + 1;
    FracField fe = rasterize_fractional_window(e, h, origin, nx, ny);
    FracField ff = rasterize_fractional_window(f, h, origin, nx, ny);
    PeriOptions opt;
    opt.boundary_hint = e.perimeter();
    PeriValue pe = nonlocal_perimeter_correlation(fe, k, eps, opt);
    opt.boundary_hint = f.perimeter();
    PeriValue pf = nonlocal_perimeter_correlation(ff, k, eps, opt);
    rep.lhs = pe.value - pf.value;
    rep.eval_err = pe.err + pf.err;

    SymDiffStats sd = symmetric_difference_stats(e, f);
    rep.sym_area = sd.area;
    rep.sym_perimeter = sd.perimeter;

    rep.bound_perimeter = sd.perimeter;
    rep.bound_perimeter_ok = rep.lhs <= rep.bound_perimeter + 3.0 * rep.eval_err;

    MomentValue i0 = moment(k, 0);
    rep.i0_finite = i0.finite();
    if (rep.i0_finite) {
        rep.bound_volume = 2.0 * i0.value * sd.area / eps;
        rep.bound_volume_ok = rep.lhs <= rep.bound_volume + 3.0 * rep.eval_err;
    }

    rep.rhs_interp = std::pow(sd.area / eps, 1.0 - s0) * std::pow(sd.perimeter, s0);
    if (rep.rhs_interp > 0.0 && rep.lhs > 0.0) {
        rep.implied_constant = rep.lhs / rep.rhs_interp;
    }
    return rep;
}

}  // namespace nlperim
