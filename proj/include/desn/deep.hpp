#pragma once

// Parallel and series compositions of L reservoirs.
//
// Parallel: every member sees s(t) and the outputs are averaged,
//   y(t) = (1/L) sum_l U_l x_l(t).
// Series: stage l consumes the full output sequence of stage l-1, with
//   y_0(t) = s(t), and y_L(t) is the network output.

#include "desn/reservoir.hpp"
#include "desn/training.hpp"

#include <cstddef>
#include <string_view>
#include <variant>
#include <vector>

namespace desn {

enum class Architecture { Shallow, Parallel, Series };

std::string_view to_string(Architecture a) noexcept;
Architecture parse_architecture(std::string_view s);

class ParallelEsn {
public:
    explicit ParallelEsn(std::vector<Esn> members);

    std::size_t size() const noexcept { return members_.size(); }
    std::vector<Esn>& members() noexcept { return members_; }
    const std::vector<Esn>& members() const noexcept { return members_; }

private:
    std::vector<Esn> members_;
};

class SeriesEsn {
public:
    explicit SeriesEsn(std::vector<Esn> stages);

    std::size_t size() const noexcept { return stages_.size(); }
    std::vector<Esn>& stages() noexcept { return stages_; }
    const std::vector<Esn>& stages() const noexcept { return stages_; }

private:
    std::vector<Esn> stages_;
};

/// L members built from `base`; member l uses member_seed(base.seed, l).
/// With same_seeds every member uses member 0's seed, so all members equal
/// the shallow network built from the same base.
ParallelEsn make_parallel(const EsnConfig& base, std::size_t layers, bool same_seeds = false);

/// L stages built from `base`; stage 1 takes base.input_dim inputs and every
/// later stage takes base.output_dim. Stage l uses member_seed(base.seed, l).
SeriesEsn make_series(const EsnConfig& base, std::size_t layers);

/// Trains every member on the same data (members may run concurrently).
/// Errors are rethrown tagged with the failing member index.
std::vector<TrainReport> parallel_train(ParallelEsn& net, const Eigen::Ref<const Matrix>& inputs,
                                        const Eigen::Ref<const Matrix>& targets, Index washout,
                                        std::size_t jobs = 1);

/// Per-member output sequences, each driven from a zero state.
std::vector<Matrix> parallel_member_outputs(ParallelEsn& net, const Eigen::Ref<const Matrix>& inputs,
                                            std::size_t jobs = 1);

/// Arithmetic mean of the member outputs, reduced in member order.
Matrix parallel_predict(ParallelEsn& net, const Eigen::Ref<const Matrix>& inputs, std::size_t jobs = 1);

/// What later series stages are trained on.
enum class SeriesHandoff {
    Prediction,  ///< the previous stage's prediction over the training window
    Target,      ///< the ground-truth target (ablation)
};

/// Sequential training. Stage l (1-based) is fitted on its own input
/// sequence with its first l * stage_washout rows excluded, so the last stage
/// ignores L * stage_washout rows. Requires T > L * stage_washout.
std::vector<TrainReport> series_train(SeriesEsn& net, const Eigen::Ref<const Matrix>& inputs,
                                      const Eigen::Ref<const Matrix>& targets, Index stage_washout,
                                      SeriesHandoff handoff = SeriesHandoff::Prediction);

/// Output of the last stage; every stage restarts from a zero state.
Matrix series_predict(SeriesEsn& net, const Eigen::Ref<const Matrix>& inputs);

/// Any of the three architectures behind one interface. A shallow network
/// is held as a one-member parallel network.
class Model {
public:
    /// Shallow ignores `layers`. Reservoir seeds follow make_parallel and
    /// make_series, so a shallow network equals parallel member 0.
    static Model build(Architecture architecture, std::size_t layers, const EsnConfig& base,
                       bool same_member_seeds = false);

    Model(Architecture architecture, ParallelEsn net);
    explicit Model(SeriesEsn net);

    Architecture architecture() const noexcept { return architecture_; }
    std::size_t layers() const noexcept;
    std::vector<Esn>& reservoirs() noexcept;
    const std::vector<Esn>& reservoirs() const noexcept;

    std::vector<TrainReport> train(const Eigen::Ref<const Matrix>& inputs, const Eigen::Ref<const Matrix>& targets,
                                   Index washout, SeriesHandoff handoff = SeriesHandoff::Prediction,
                                   std::size_t jobs = 1);
    Matrix predict(const Eigen::Ref<const Matrix>& inputs, std::size_t jobs = 1);

    /// Rows to ignore when scoring: washout, or L * washout for series.
    Index evaluation_skip(Index washout) const noexcept;

private:
    Architecture architecture_;
    std::variant<ParallelEsn, SeriesEsn> net_;
};

}  // namespace desn
