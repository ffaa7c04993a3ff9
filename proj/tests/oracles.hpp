#pragma once

// Straightforward reference implementations used to check the library.
// They follow the textbook definitions directly and share no code with it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace oracle {

using Grid = std::vector<std::vector<double>>;  // L rows x 10 columns

inline int group_index(char aa) {
    static const char* groups[10] = {"FYW", "ML", "IV", "ATS", "NH", "QED", "RK", "C", "G", "P"};
    for (int g = 0; g < 10; ++g)
        for (const char* p = groups[g]; *p; ++p)
            if (*p == aa) return g;
    return -1;
}

inline std::vector<double> eg(const std::string& residues, const Grid& g) {
    std::vector<double> out(100, 0.0);
    for (int gi = 0; gi < 10; ++gi) {
        int n = 0;
        std::vector<double> sum(10, 0.0);
        for (std::size_t k = 0; k < residues.size(); ++k) {
            if (group_index(residues[k]) != gi) continue;
            ++n;
            for (int j = 0; j < 10; ++j) sum[j] += g[k][j];
        }
        for (int j = 0; j < 10; ++j) out[gi * 10 + j] = n ? sum[j] / n : 0.0;
    }
    return out;
}

inline std::vector<double> gdpc(const Grid& g) {
    const std::size_t L = g.size();
    std::vector<double> out;
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) {
            double s = 0.0;
            for (std::size_t k = 1; k <= L - 1; ++k) s += g[k - 1][i] * g[k][j];
            out.push_back(s / double(L - 1));
        }
    return out;
}

inline std::vector<double> er(const Grid& g) {
    const std::size_t L = g.size();
    std::vector<double> out;
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j)
            for (std::size_t t = 1; t <= 9; ++t) {
                double s = 0.0;
                for (std::size_t k = 1; k <= L - t; ++k) s += std::pow(g[k - 1][i] - g[k - 1 + t][j], 2) / 2.0;
                out.push_back(s / double(L - t));
            }
    for (int i = 0; i < 10; ++i) {
        double mean = 0.0;
        for (std::size_t k = 0; k < L; ++k) mean += g[k][i] / double(L);
        double s = 0.0;
        for (std::size_t k = 0; k < L; ++k) s += std::pow(g[k][i] - mean, 2);
        out.push_back(s / double(L));
    }
    return out;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Confusion matrix entries as long double for a second, wider evaluation path.
struct Cm {
    std::vector<std::vector<long long>> c;  // [true][pred]
    int n() const { return int(c.size()); }
};

inline Cm tally(const std::vector<int>& t, const std::vector<int>& p, int C) {
    Cm cm{std::vector<std::vector<long long>>(C, std::vector<long long>(C, 0))};
    for (std::size_t i = 0; i < t.size(); ++i) cm.c[t[i]][p[i]]++;
    return cm;
}

struct Binary {
    long double tp = 0, fp = 0, fn = 0, tn = 0;
};

inline Binary binarize(const Cm& cm, int k) {
    Binary b;
    for (int i = 0; i < cm.n(); ++i)
        for (int j = 0; j < cm.n(); ++j) {
            const long double v = cm.c[i][j];
            if (i == k && j == k) b.tp += v;
            else if (i == k) b.fn += v;
            else if (j == k) b.fp += v;
            else b.tn += v;
        }
    return b;
}

inline double f1(const Cm& cm, int k) {
    auto b = binarize(cm, k);
    const long double p = b.tp + b.fp == 0 ? 0 : b.tp / (b.tp + b.fp);
    const long double r = b.tp + b.fn == 0 ? 0 : b.tp / (b.tp + b.fn);
    return p + r == 0 ? 0.0 : double(2 * p * r / (p + r));
}

inline double mcc(const Cm& cm, int k) {
    auto b = binarize(cm, k);
    const long double d = (b.tp + b.fp) * (b.tp + b.fn) * (b.tn + b.fp) * (b.tn + b.fn);
    return d == 0 ? 0.0 : double((b.tp * b.tn - b.fp * b.fn) / std::sqrt(d));
}

// Multiclass correlation written as a covariance ratio over one-hot vectors.
inline double overall_mcc(const Cm& cm) {
    const int C = cm.n();
    long double cov_xy = 0, cov_xx = 0, cov_yy = 0;
    std::vector<long double> t(C, 0), p(C, 0);
    long double s = 0, c = 0;
    for (int i = 0; i < C; ++i)
        for (int j = 0; j < C; ++j) {
            t[i] += cm.c[i][j];
            p[j] += cm.c[i][j];
            s += cm.c[i][j];
            if (i == j) c += cm.c[i][j];
        }
    cov_xy = c * s;
    long double pp = 0, tt = 0;
    for (int k = 0; k < C; ++k) {
        cov_xy -= p[k] * t[k];
        pp += p[k] * p[k];
        tt += t[k] * t[k];
    }
    cov_xx = s * s - pp;
    cov_yy = s * s - tt;
    if (cov_xx == 0 || cov_yy == 0) return 0.0;
    return double(cov_xy / std::sqrt(cov_xx * cov_yy));
}

// Average precision by walking every distinct threshold and recomputing the
// confusion counts from scratch.
inline double average_precision(const std::vector<double>& scores, const std::vector<int>& pos) {
    std::vector<double> thr(scores);
    std::sort(thr.begin(), thr.end(), std::greater<>());
    thr.erase(std::unique(thr.begin(), thr.end()), thr.end());
    long double P = 0;
    for (int v : pos) P += v;
    long double ap = 0, prev_r = 0;
    for (double th : thr) {
        long double tp = 0, pred = 0;
        for (std::size_t i = 0; i < scores.size(); ++i)
            if (scores[i] >= th) {
                pred += 1;
                tp += pos[i];
            }
        const long double r = tp / P;
        ap += (r - prev_r) * (tp / pred);
        prev_r = r;
    }
    return double(ap);
}

inline double rel_err(double a, double b) {
    const double d = std::abs(a - b);
    const double s = std::max(std::abs(a), std::abs(b));
    return s < 1e-300 ? d : d / s;
}

}  // namespace oracle
