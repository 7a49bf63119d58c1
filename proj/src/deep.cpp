#include "desn/deep.hpp"

#include "desn/concurrency.hpp"
#include "desn/errors.hpp"

#include <fmt/format.h>

#include <exception>
#include <optional>

namespace desn {

std::string_view to_string(Architecture a) noexcept {
    switch (a) {
    case Architecture::Shallow: return "shallow";
    case Architecture::Parallel: return "parallel";
    case Architecture::Series: return "series";
    }
    return "?";
}

Architecture parse_architecture(std::string_view s) {
    if (s == "shallow") return Architecture::Shallow;
    if (s == "parallel") return Architecture::Parallel;
    if (s == "series") return Architecture::Series;
    throw config_error(fmt::format("unknown architecture '{}' (expected shallow|parallel|series)", s));
}

namespace {

[[noreturn]] void rethrow_tagged(const std::exception_ptr& ep, std::string_view what, std::size_t index) {
    const auto tag = [&](const std::exception& e) { return fmt::format("{} {}: {}", what, index, e.what()); };
    try {
        std::rethrow_exception(ep);
    } catch (const config_error& e) {
        throw config_error(tag(e));
    } catch (const data_error& e) {
        throw data_error(tag(e));
    } catch (const numerical_error& e) {
        throw numerical_error(tag(e));
    } catch (const std::exception& e) {
        throw error(tag(e));
    }
}

template <typename Fn>
void for_each_member(std::size_t n, std::size_t jobs, Fn&& fn) {
    std::vector<std::exception_ptr> failures(n);
    parallel_for(n, jobs, [&](std::size_t l) {
        try {
            fn(l);
        } catch (...) {
            failures[l] = std::current_exception();
        }
    });
    for (std::size_t l = 0; l < n; ++l) {
        if (failures[l]) rethrow_tagged(failures[l], "member", l);
    }
}

}  // namespace

ParallelEsn::ParallelEsn(std::vector<Esn> members) : members_{std::move(members)} {
    if (members_.empty()) throw config_error("a parallel network needs at least one member");
    const auto& first = members_.front().config();
    for (const auto& m : members_) {
        if (m.config().input_dim != first.input_dim || m.config().output_dim != first.output_dim) {
            throw config_error("parallel members must share input and output dimensions");
        }
    }
}

SeriesEsn::SeriesEsn(std::vector<Esn> stages) : stages_{std::move(stages)} {
    if (stages_.empty()) throw config_error("a series network needs at least one stage");
    const Index m = stages_.front().config().output_dim;
    for (std::size_t l = 0; l < stages_.size(); ++l) {
        const auto& c = stages_[l].config();
        if (c.output_dim != m) throw config_error("series stages must share the output dimension");
        if (l > 0 && c.input_dim != m) {
            throw config_error(fmt::format("series stage {} must take {} inputs (got {})", l, m, c.input_dim));
        }
    }
}

ParallelEsn make_parallel(const EsnConfig& base, std::size_t layers, bool same_seeds) {
    if (layers < 1) throw config_error("number of reservoirs L must be >= 1");
    std::vector<Esn> members;
    members.reserve(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        EsnConfig c = base;
        c.seed = member_seed(base.seed, same_seeds ? 0 : l);
        members.push_back(build_esn(c));
    }
    return ParallelEsn{std::move(members)};
}

SeriesEsn make_series(const EsnConfig& base, std::size_t layers) {
    if (layers < 1) throw config_error("number of reservoirs L must be >= 1");
    std::vector<Esn> stages;
    stages.reserve(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        EsnConfig c = base;
        c.seed = member_seed(base.seed, l);
        if (l > 0) c.input_dim = base.output_dim;
        stages.push_back(build_esn(c));
    }
    return SeriesEsn{std::move(stages)};
}

std::vector<TrainReport> parallel_train(ParallelEsn& net, const Eigen::Ref<const Matrix>& inputs,
                                        const Eigen::Ref<const Matrix>& targets, Index washout,
                                        std::size_t jobs) {
    std::vector<TrainReport> reports(net.size());
    for_each_member(net.size(), jobs,
                    [&](std::size_t l) { reports[l] = train_esn(net.members()[l], inputs, targets, washout); });
    return reports;
}

std::vector<Matrix> parallel_member_outputs(ParallelEsn& net, const Eigen::Ref<const Matrix>& inputs,
                                            std::size_t jobs) {
    std::vector<Matrix> outputs(net.size());
    for_each_member(net.size(), jobs, [&](std::size_t l) { outputs[l] = net.members()[l].predict(inputs); });
    return outputs;
}

Matrix parallel_predict(ParallelEsn& net, const Eigen::Ref<const Matrix>& inputs, std::size_t jobs) {
    std::vector<Matrix> outputs = parallel_member_outputs(net, inputs, jobs);
    Matrix sum = std::move(outputs.front());
    for (std::size_t l = 1; l < outputs.size(); ++l) sum += outputs[l];
    return sum / static_cast<double>(outputs.size());
}

std::vector<TrainReport> series_train(SeriesEsn& net, const Eigen::Ref<const Matrix>& inputs,
                                      const Eigen::Ref<const Matrix>& targets, Index stage_washout,
                                      SeriesHandoff handoff) {
    const auto layers = static_cast<Index>(net.size());
    if (stage_washout < 0) throw config_error("stage washout must be >= 0");
    if (inputs.rows() <= layers * stage_washout) {
        throw data_error(fmt::format(
            "washout shortfall: sequence of length {} is too short for the cumulative series washout "
            "L x L_fo = {} x {} = {}",
            inputs.rows(), layers, stage_washout, layers * stage_washout));
    }
    std::vector<TrainReport> reports;
    reports.reserve(net.size());
    Matrix previous;
    for (Index l = 0; l < layers; ++l) {
        Esn& stage = net.stages()[static_cast<std::size_t>(l)];
        const Index washout = (l + 1) * stage_washout;
        try {
            if (l == 0) {
                reports.push_back(train_esn(stage, inputs, targets, washout));
                if (layers > 1) previous = stage.predict(inputs);
            } else {
                const Matrix stage_input = handoff == SeriesHandoff::Target ? Matrix(targets) : previous;
                reports.push_back(train_esn(stage, stage_input, targets, washout));
                if (l + 1 < layers && handoff == SeriesHandoff::Prediction) previous = stage.predict(stage_input);
            }
        } catch (...) {
            rethrow_tagged(std::current_exception(), "stage", static_cast<std::size_t>(l));
        }
    }
    return reports;
}

Matrix series_predict(SeriesEsn& net, const Eigen::Ref<const Matrix>& inputs) {
    Matrix signal = net.stages().front().predict(inputs);
    for (std::size_t l = 1; l < net.size(); ++l) signal = net.stages()[l].predict(signal);
    return signal;
}

Model Model::build(Architecture architecture, std::size_t layers, const EsnConfig& base, bool same_member_seeds) {
    switch (architecture) {
    case Architecture::Shallow: return Model{architecture, make_parallel(base, 1)};
    case Architecture::Parallel: return Model{architecture, make_parallel(base, layers, same_member_seeds)};
    case Architecture::Series: return Model{make_series(base, layers)};
    }
    throw config_error("unknown architecture");
}

Model::Model(Architecture architecture, ParallelEsn net) : architecture_{architecture}, net_{std::move(net)} {
    if (architecture == Architecture::Series) throw config_error("a series model needs a SeriesEsn");
    if (architecture == Architecture::Shallow && std::get<ParallelEsn>(net_).size() != 1) {
        throw config_error("a shallow model has exactly one reservoir");
    }
}

Model::Model(SeriesEsn net) : architecture_{Architecture::Series}, net_{std::move(net)} {}

std::size_t Model::layers() const noexcept {
    return std::visit([](const auto& n) { return n.size(); }, net_);
}

std::vector<Esn>& Model::reservoirs() noexcept {
    if (auto* p = std::get_if<ParallelEsn>(&net_)) return p->members();
    return std::get<SeriesEsn>(net_).stages();
}

const std::vector<Esn>& Model::reservoirs() const noexcept {
    if (const auto* p = std::get_if<ParallelEsn>(&net_)) return p->members();
    return std::get<SeriesEsn>(net_).stages();
}

std::vector<TrainReport> Model::train(const Eigen::Ref<const Matrix>& inputs, const Eigen::Ref<const Matrix>& targets,
                                      Index washout, SeriesHandoff handoff, std::size_t jobs) {
    if (auto* p = std::get_if<ParallelEsn>(&net_)) return parallel_train(*p, inputs, targets, washout, jobs);
    return series_train(std::get<SeriesEsn>(net_), inputs, targets, washout, handoff);
}

Matrix Model::predict(const Eigen::Ref<const Matrix>& inputs, std::size_t jobs) {
    if (auto* p = std::get_if<ParallelEsn>(&net_)) return parallel_predict(*p, inputs, jobs);
    return series_predict(std::get<SeriesEsn>(net_), inputs);
}

Index Model::evaluation_skip(Index washout) const noexcept {
    return architecture_ == Architecture::Series ? static_cast<Index>(layers()) * washout : washout;
}

}  // namespace desn
