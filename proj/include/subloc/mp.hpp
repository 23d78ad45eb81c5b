#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <functional>
#include <vector>

#include "subloc/errors.hpp"
#include "subloc/hermite.hpp"
#include "subloc/schedule.hpp"

namespace subloc {

// Directed messages and beliefs at iteration t. messages(i, j) holds the
// value index i sends to index j; the diagonal is never read.
struct MessageState {
    int t = 0;
    Eigen::MatrixXd messages;
    Eigen::VectorXd beliefs;

    explicit MessageState(int n) : messages(Eigen::MatrixXd::Zero(n, n)),
                                   beliefs(Eigen::VectorXd::Zero(n)) {}
};

// One message iteration: with g = f_t applied to the incoming messages,
//   S_i        = sum_{l != i} A(l,i) g(l,i)      (the new belief)
//   m(i -> j)  = S_i - A(j,i) g(j,i)             (leave-one-out correction)
// The transform and the belief sum share one pass over each column; the
// pair (i,j)/(j,i) is then rewritten together, walking square blocks so
// the row-side accesses stay cache-resident at large n. Each entry is
// computed by the same expression in the same order regardless of the
// block size, so results are reproducible per seed. Work is
// Theta(n^2 * d).
inline void mp_step(const Eigen::MatrixXd& A, MessageState& st, const HermiteCoeffs& f_t) {
    const int n = static_cast<int>(A.rows());
    if (A.cols() != n) throw Error("mp_step: A must be square");
    if (st.messages.rows() != n) throw Error("mp_step: state size does not match A");

    Eigen::MatrixXd& m = st.messages;
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) {
            if (l != i) {
                double g = eval_nonlinearity(f_t, m(l, i));
                m(l, i) = g;
                s += A(l, i) * g;
            }
        }
        st.beliefs(i) = s;
    }
    constexpr int kBlock = 64;
    for (int j0 = 0; j0 < n; j0 += kBlock) {
        const int j1 = std::min(j0 + kBlock, n);
        for (int i0 = 0; i0 <= j0; i0 += kBlock) {
            const int i1 = std::min(i0 + kBlock, n);
            for (int j = j0; j < j1; ++j) {
                const int ihi = std::min(i1, j);
                for (int i = i0; i < ihi; ++i) {
                    double gij = m(i, j);
                    double gji = m(j, i);
                    m(i, j) = st.beliefs(i) - A(j, i) * gji;
                    m(j, i) = st.beliefs(j) - A(i, j) * gij;
                }
            }
        }
    }
    ++st.t;
}

// Belief-only application of the same update (no message rewrite). The
// incoming messages are consumed: they hold transformed values afterwards.
inline void mp_beliefs_only(const Eigen::MatrixXd& A, MessageState& st,
                            const HermiteCoeffs& f_t) {
    const int n = static_cast<int>(A.rows());
    Eigen::MatrixXd& m = st.messages;
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) {
            if (l != i) {
                double g = eval_nonlinearity(f_t, m(l, i));
                m(l, i) = g;
                s += A(l, i) * g;
            }
        }
        st.beliefs(i) = s;
    }
    ++st.t;
}

// Runs t_star - 1 message iterations followed by one belief-only pass, so
// the returned beliefs sit at iteration t_star of the planned trace. The
// optional observer sees (t, beliefs) after every iteration.
inline Eigen::VectorXd run_mp(
    const Eigen::MatrixXd& A, const NonlinearitySchedule& schedule,
    const std::function<void(int, const Eigen::VectorXd&)>& observer = nullptr) {
    if (schedule.t_star < 1) throw Error("run_mp: schedule horizon must be >= 1");
    MessageState st(static_cast<int>(A.rows()));
    for (int t = 0; t + 1 < schedule.t_star; ++t) {
        mp_step(A, st, schedule.coeffs.at(t));
        if (observer) observer(st.t, st.beliefs);
    }
    mp_beliefs_only(A, st, schedule.coeffs.at(schedule.t_star - 1));
    if (observer) observer(st.t, st.beliefs);
    return st.beliefs;
}

// Candidate set {i : beliefs_i >= mu_hat_tstar / 2}; the boundary value is
// included.
inline std::vector<int> threshold_beliefs(const Eigen::VectorXd& beliefs, double mu_hat_tstar) {
    if (!(mu_hat_tstar > 0.0)) throw Error("threshold_beliefs: mu_hat must be positive");
    std::vector<int> out;
    for (int i = 0; i < beliefs.size(); ++i) {
        if (beliefs(i) >= 0.5 * mu_hat_tstar) out.push_back(i);
    }
    return out;
}

// Messages and beliefs for the rectangular model. Half-steps alternate
// sides, columns first: half-step c even consumes the row->col array and
// produces column messages/beliefs at index c+1 (odd); half-step c odd
// produces row messages/beliefs at the even index c+1. Row beliefs
// therefore live at even indices and column beliefs at odd ones, matching
// the alternating trace whose even-step multiplier is lambda1.
struct BiclusterMessageState {
    int t = 0;                   // half-steps completed
    Eigen::MatrixXd row_to_col;  // n1 x n2, entry (i,j) = message i -> j
    Eigen::MatrixXd col_to_row;  // n2 x n1, entry (j,i) = message j -> i
    Eigen::VectorXd row_beliefs;  // index t when t even (from half-step t-1)
    Eigen::VectorXd col_beliefs;  // index t when t odd

    BiclusterMessageState(int n1, int n2)
        : row_to_col(Eigen::MatrixXd::Zero(n1, n2)),
          col_to_row(Eigen::MatrixXd::Zero(n2, n1)),
          row_beliefs(Eigen::VectorXd::Zero(n1)),
          col_beliefs(Eigen::VectorXd::Zero(n2)) {}
};

// One half-step. parity must equal state.t % 2 (a cross-check, since the
// state already knows where it is). Even half-steps scale by 1/sqrt(n1)
// and write the column side; odd ones scale by 1/sqrt(n2) and write rows.
// `write_messages = false` turns the call into the final belief-only pass.
inline void mp_step_bicluster(const Eigen::MatrixXd& W, BiclusterMessageState& st,
                              const HermiteCoeffs& f_t, int parity,
                              bool write_messages = true) {
    const int n1 = static_cast<int>(W.rows());
    const int n2 = static_cast<int>(W.cols());
    if (st.row_to_col.rows() != n1 || st.row_to_col.cols() != n2) {
        throw Error("mp_step_bicluster: state size does not match W");
    }
    if (parity != st.t % 2) throw Error("mp_step_bicluster: parity does not match state");

    if (parity == 0) {
        // Columns receive: transform row->col messages in place, then for
        // each column j form S_j = (1/sqrt(n1)) sum_i W(i,j) g(i,j).
        double inv = 1.0 / std::sqrt(static_cast<double>(n1));
        Eigen::MatrixXd& g = st.row_to_col;
        for (int j = 0; j < n2; ++j) {
            for (int i = 0; i < n1; ++i) g(i, j) = eval_nonlinearity(f_t, g(i, j));
            double s = 0.0;
            for (int i = 0; i < n1; ++i) s += W(i, j) * g(i, j);
            st.col_beliefs(j) = inv * s;
        }
        if (write_messages) {
            for (int j = 0; j < n2; ++j) {
                for (int i = 0; i < n1; ++i) {
                    st.col_to_row(j, i) = st.col_beliefs(j) - inv * W(i, j) * g(i, j);
                }
            }
        }
    } else {
        double inv = 1.0 / std::sqrt(static_cast<double>(n2));
        Eigen::MatrixXd& g = st.col_to_row;
        for (int i = 0; i < n1; ++i) {
            for (int j = 0; j < n2; ++j) g(j, i) = eval_nonlinearity(f_t, g(j, i));
            double s = 0.0;
            for (int j = 0; j < n2; ++j) s += W(i, j) * g(j, i);
            st.row_beliefs(i) = inv * s;
        }
        if (write_messages) {
            for (int i = 0; i < n1; ++i) {
                for (int j = 0; j < n2; ++j) {
                    st.row_to_col(i, j) = st.row_beliefs(i) - inv * W(i, j) * g(j, i);
                }
            }
        }
    }
    ++st.t;
}

// Runs t_star + 1 half-steps (the last one belief-only), leaving row
// beliefs at index t_star and column beliefs at index t_star + 1.
// t_star must be even.
struct BiclusterBeliefs {
    Eigen::VectorXd rows;  // index t_star
    Eigen::VectorXd cols;  // index t_star + 1
};

inline BiclusterBeliefs run_mp_bicluster(const Eigen::MatrixXd& W,
                                         const NonlinearitySchedule& schedule) {
    if (schedule.t_star < 2 || schedule.t_star % 2 != 0) {
        throw Error("run_mp_bicluster: t_star must be even and >= 2");
    }
    BiclusterMessageState st(static_cast<int>(W.rows()), static_cast<int>(W.cols()));
    for (int c = 0; c <= schedule.t_star; ++c) {
        bool last = (c == schedule.t_star);
        mp_step_bicluster(W, st, schedule.coeffs.at(c), c % 2, !last);
    }
    return {st.row_beliefs, st.col_beliefs};
}

}  // namespace subloc
