#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "pecf/nn/activations.hpp"
#include "pecf/rng.hpp"
#include "pecf/tensor.hpp"

namespace pecf::nn {

/// Named view of one trainable tensor and its gradient accumulator.
struct param_ref {
    std::string name;
    tensor* value;
    tensor* grad;
};

namespace detail {

inline void glorot_fill(tensor& w, rng& r) {
    const double fan_out = static_cast<double>(w.shape[0]);
    const double fan_in = static_cast<double>(w.shape[1]);
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& x : w.data) x = r.uniform(-limit, limit);
}

// y += W x, with W of shape (rows x cols) and x of length cols.
inline void add_matvec(const tensor& w, const double* x, double* y) {
    const std::size_t rows = w.shape[0], cols = w.shape[1];
    for (std::size_t i = 0; i < rows; ++i) {
        const double* wi = w.data.data() + i * cols;
        double acc = 0.0;
        for (std::size_t j = 0; j < cols; ++j) acc += wi[j] * x[j];
        y[i] += acc;
    }
}

// y += W^T d, with d of length rows; y has length cols.
inline void add_matvec_t(const tensor& w, const double* d, double* y) {
    const std::size_t rows = w.shape[0], cols = w.shape[1];
    for (std::size_t i = 0; i < rows; ++i) {
        const double di = d[i];
        const double* wi = w.data.data() + i * cols;
        for (std::size_t j = 0; j < cols; ++j) y[j] += di * wi[j];
    }
}

// G += d (outer) x, with G of shape (rows x cols).
inline void add_outer(tensor& g, const double* d, const double* x) {
    const std::size_t rows = g.shape[0], cols = g.shape[1];
    for (std::size_t i = 0; i < rows; ++i) {
        const double di = d[i];
        double* gi = g.data.data() + i * cols;
        for (std::size_t j = 0; j < cols; ++j) gi[j] += di * x[j];
    }
}

} // namespace detail

/// Base of all layers. forward() caches whatever backward() needs; backward()
/// accumulates parameter gradients (callers zero them between batches) and
/// returns the gradient with respect to the layer input.
class layer {
public:
    virtual ~layer() = default;
    virtual tensor forward(const tensor& x) = 0;
    virtual tensor backward(const tensor& dy) = 0;
    virtual std::vector<param_ref> params() = 0;
    virtual void init(rng& r) = 0;
    [[nodiscard]] virtual std::size_t output_width() const = 0;
    [[nodiscard]] virtual bool outputs_sequence() const = 0;

    void zero_grad() {
        for (param_ref& p : params()) p.grad->fill(0.0);
    }
};

/// Fully connected layer on a single row vector.
class dense_layer : public layer {
public:
    dense_layer(std::string name, std::size_t in, std::size_t out, activation act,
                double act_cap = 1.0)
        : name_(std::move(name)), act_(act), cap_(act_cap) {
        w_ = tensor::matrix(out, in);
        b_ = tensor::zeros({out});
        gw_ = tensor::matrix(out, in);
        gb_ = tensor::zeros({out});
    }

    void init(rng& r) override { detail::glorot_fill(w_, r); }

    tensor forward(const tensor& x) override {
        if (x.rank() != 2 || x.rows() != 1)
            throw std::runtime_error("dense layer expects a single row; use "
                                     "time_distributed_dense for sequences");
        x_ = x;
        const std::size_t out = w_.shape[0];
        pre_ = tensor::zeros({1, out});
        for (std::size_t i = 0; i < out; ++i) pre_.data[i] = b_.data[i];
        detail::add_matvec(w_, x.data.data(), pre_.data.data());
        tensor y = tensor::zeros({1, out});
        for (std::size_t i = 0; i < out; ++i)
            y.data[i] = apply_activation(act_, pre_.data[i], cap_);
        y_ = y;
        return y;
    }

    tensor backward(const tensor& dy) override {
        const std::size_t out = w_.shape[0], in = w_.shape[1];
        std::vector<double> da(out);
        for (std::size_t i = 0; i < out; ++i)
            da[i] = dy.data[i] * activation_derivative(act_, pre_.data[i], y_.data[i], cap_);
        detail::add_outer(gw_, da.data(), x_.data.data());
        for (std::size_t i = 0; i < out; ++i) gb_.data[i] += da[i];
        tensor dx = tensor::zeros({1, in});
        detail::add_matvec_t(w_, da.data(), dx.data.data());
        return dx;
    }

    std::vector<param_ref> params() override {
        return {{name_ + ".W", &w_, &gw_}, {name_ + ".b", &b_, &gb_}};
    }

    [[nodiscard]] std::size_t output_width() const override { return w_.shape[0]; }
    [[nodiscard]] bool outputs_sequence() const override { return false; }

private:
    std::string name_;
    activation act_;
    double cap_;
    tensor w_, b_, gw_, gb_;
    tensor x_, pre_, y_;
};

/// The same dense transform applied independently to every step of a
/// sequence (one shared weight matrix).
class time_distributed_dense_layer : public layer {
public:
    time_distributed_dense_layer(std::string name, std::size_t in, std::size_t out,
                                 activation act, double act_cap = 1.0)
        : name_(std::move(name)), act_(act), cap_(act_cap) {
        w_ = tensor::matrix(out, in);
        b_ = tensor::zeros({out});
        gw_ = tensor::matrix(out, in);
        gb_ = tensor::zeros({out});
    }

    void init(rng& r) override { detail::glorot_fill(w_, r); }

    tensor forward(const tensor& x) override {
        x_ = x;
        const std::size_t steps = x.rows(), out = w_.shape[0];
        pre_ = tensor::matrix(steps, out);
        tensor y = tensor::matrix(steps, out);
        for (std::size_t t = 0; t < steps; ++t) {
            for (std::size_t i = 0; i < out; ++i) pre_(t, i) = b_.data[i];
            detail::add_matvec(w_, &x.data[t * x.cols()], &pre_.data[t * out]);
            for (std::size_t i = 0; i < out; ++i)
                y(t, i) = apply_activation(act_, pre_(t, i), cap_);
        }
        y_ = y;
        return y;
    }

    tensor backward(const tensor& dy) override {
        const std::size_t steps = x_.rows(), out = w_.shape[0], in = w_.shape[1];
        tensor dx = tensor::matrix(steps, in);
        std::vector<double> da(out);
        for (std::size_t t = 0; t < steps; ++t) {
            for (std::size_t i = 0; i < out; ++i)
                da[i] = dy(t, i) * activation_derivative(act_, pre_(t, i), y_(t, i), cap_);
            detail::add_outer(gw_, da.data(), &x_.data[t * in]);
            for (std::size_t i = 0; i < out; ++i) gb_.data[i] += da[i];
            detail::add_matvec_t(w_, da.data(), &dx.data[t * in]);
        }
        return dx;
    }

    std::vector<param_ref> params() override {
        return {{name_ + ".W", &w_, &gw_}, {name_ + ".b", &b_, &gb_}};
    }

    [[nodiscard]] std::size_t output_width() const override { return w_.shape[0]; }
    [[nodiscard]] bool outputs_sequence() const override { return true; }

private:
    std::string name_;
    activation act_;
    double cap_;
    tensor w_, b_, gw_, gb_;
    tensor x_, pre_, y_;
};

/// Tiles a single row into a fixed-length sequence, bridging an encoder's
/// summary vector into a decoder that wants one input per output step.
class repeat_expand_layer : public layer {
public:
    repeat_expand_layer(std::size_t count, std::size_t width) : count_(count), width_(width) {
        if (count_ < 1) throw std::runtime_error("repeat_expand: count must be >= 1");
    }

    void init(rng&) override {}

    tensor forward(const tensor& x) override {
        if (x.rank() != 2 || x.rows() != 1)
            throw std::runtime_error("repeat_expand expects a single row input");
        tensor y = tensor::matrix(count_, width_);
        for (std::size_t t = 0; t < count_; ++t)
            for (std::size_t j = 0; j < width_; ++j) y(t, j) = x.data[j];
        return y;
    }

    tensor backward(const tensor& dy) override {
        tensor dx = tensor::zeros({1, width_});
        for (std::size_t t = 0; t < count_; ++t)
            for (std::size_t j = 0; j < width_; ++j) dx.data[j] += dy(t, j);
        return dx;
    }

    std::vector<param_ref> params() override { return {}; }
    [[nodiscard]] std::size_t output_width() const override { return width_; }
    [[nodiscard]] bool outputs_sequence() const override { return true; }

private:
    std::size_t count_, width_;
};

/// Gated recurrent unit over a sequence of rows. Gate pre-activations use
/// the logistic function; the configured activation applies to the candidate
/// state only. With h the running state and x_t the step input:
///   z = sigmoid(Wz x + Uz h + bz)        update gate
///   r = sigmoid(Wr x + Ur h + br)        reset gate
///   hc = act(Wh x + Uh (r*h) + bh)       candidate
///   h' = (1 - z) * h + z * hc
class gru_layer : public layer {
public:
    gru_layer(std::string name, std::size_t in, std::size_t units, activation act,
              bool return_sequences)
        : name_(std::move(name)), in_(in), units_(units), act_(act), seq_(return_sequences) {
        for (tensor* t : {&wz_, &wr_, &wh_, &gwz_, &gwr_, &gwh_}) *t = tensor::matrix(units, in);
        for (tensor* t : {&uz_, &ur_, &uh_, &guz_, &gur_, &guh_}) *t = tensor::matrix(units, units);
        for (tensor* t : {&bz_, &br_, &bh_, &gbz_, &gbr_, &gbh_}) *t = tensor::zeros({units});
    }

    void init(rng& r) override {
        detail::glorot_fill(wz_, r);
        detail::glorot_fill(wr_, r);
        detail::glorot_fill(wh_, r);
        detail::glorot_fill(uz_, r);
        detail::glorot_fill(ur_, r);
        detail::glorot_fill(uh_, r);
    }

    tensor forward(const tensor& x) override { return forward_from(x, tensor::zeros({units_})); }

    /// Forward pass with an explicit initial state, exposed for unit-level
    /// verification of the recurrence itself.
    tensor forward_from(const tensor& x, const tensor& h0) {
        if (x.rank() != 2 || x.cols() != in_)
            throw std::runtime_error(name_ + ": expected input width " + std::to_string(in_) +
                                     ", got " + std::to_string(x.cols()));
        if (h0.size() != units_) throw std::runtime_error(name_ + ": bad initial state size");
        x_ = x;
        const std::size_t steps = x.rows();
        h0_ = h0;
        z_ = tensor::matrix(steps, units_);
        r_ = tensor::matrix(steps, units_);
        ah_ = tensor::matrix(steps, units_);
        hc_ = tensor::matrix(steps, units_);
        h_ = tensor::matrix(steps, units_);

        std::vector<double> rh(units_);
        const double* h_prev = h0_.data.data();
        for (std::size_t t = 0; t < steps; ++t) {
            const double* xt = &x.data[t * in_];
            double* zt = &z_.data[t * units_];
            double* rt = &r_.data[t * units_];
            double* aht = &ah_.data[t * units_];
            double* hct = &hc_.data[t * units_];
            double* ht = &h_.data[t * units_];

            for (std::size_t i = 0; i < units_; ++i) zt[i] = bz_.data[i];
            detail::add_matvec(wz_, xt, zt);
            detail::add_matvec(uz_, h_prev, zt);
            for (std::size_t i = 0; i < units_; ++i) zt[i] = sigmoid(zt[i]);

            for (std::size_t i = 0; i < units_; ++i) rt[i] = br_.data[i];
            detail::add_matvec(wr_, xt, rt);
            detail::add_matvec(ur_, h_prev, rt);
            for (std::size_t i = 0; i < units_; ++i) rt[i] = sigmoid(rt[i]);

            for (std::size_t i = 0; i < units_; ++i) rh[i] = rt[i] * h_prev[i];
            for (std::size_t i = 0; i < units_; ++i) aht[i] = bh_.data[i];
            detail::add_matvec(wh_, xt, aht);
            detail::add_matvec(uh_, rh.data(), aht);
            for (std::size_t i = 0; i < units_; ++i) {
                hct[i] = apply_activation(act_, aht[i]);
                ht[i] = (1.0 - zt[i]) * h_prev[i] + zt[i] * hct[i];
            }
            h_prev = ht;
        }

        if (seq_) return h_;
        tensor out = tensor::zeros({1, units_});
        for (std::size_t i = 0; i < units_; ++i) out.data[i] = h_((steps - 1), i);
        return out;
    }

    tensor backward(const tensor& dy) override {
        const std::size_t steps = x_.rows();
        tensor dx = tensor::matrix(steps, in_);
        std::vector<double> dh(units_, 0.0), dh_prev(units_), dhc(units_), dz(units_),
            dah(units_), drh(units_), dr(units_), daz(units_), dar(units_), rh(units_);

        for (std::size_t t = steps; t-- > 0;) {
            if (seq_) {
                for (std::size_t i = 0; i < units_; ++i) dh[i] += dy(t, i);
            } else if (t == steps - 1) {
                for (std::size_t i = 0; i < units_; ++i) dh[i] += dy.data[i];
            }
            const double* h_prev = (t == 0) ? h0_.data.data() : &h_.data[(t - 1) * units_];
            const double* xt = &x_.data[t * in_];
            const double* zt = &z_.data[t * units_];
            const double* rt = &r_.data[t * units_];
            const double* aht = &ah_.data[t * units_];
            const double* hct = &hc_.data[t * units_];

            for (std::size_t i = 0; i < units_; ++i) {
                dhc[i] = dh[i] * zt[i];
                dz[i] = dh[i] * (hct[i] - h_prev[i]);
                dh_prev[i] = dh[i] * (1.0 - zt[i]);
                dah[i] = dhc[i] * activation_derivative(act_, aht[i], hct[i]);
                rh[i] = rt[i] * h_prev[i];
            }
            detail::add_outer(gwh_, dah.data(), xt);
            detail::add_outer(guh_, dah.data(), rh.data());
            for (std::size_t i = 0; i < units_; ++i) gbh_.data[i] += dah[i];

            std::fill(drh.begin(), drh.end(), 0.0);
            detail::add_matvec_t(uh_, dah.data(), drh.data());
            for (std::size_t i = 0; i < units_; ++i) {
                dr[i] = drh[i] * h_prev[i];
                dh_prev[i] += drh[i] * rt[i];
                daz[i] = dz[i] * zt[i] * (1.0 - zt[i]);
                dar[i] = dr[i] * rt[i] * (1.0 - rt[i]);
            }
            detail::add_outer(gwz_, daz.data(), xt);
            detail::add_outer(guz_, daz.data(), h_prev);
            detail::add_outer(gwr_, dar.data(), xt);
            detail::add_outer(gur_, dar.data(), h_prev);
            for (std::size_t i = 0; i < units_; ++i) {
                gbz_.data[i] += daz[i];
                gbr_.data[i] += dar[i];
            }
            detail::add_matvec_t(uz_, daz.data(), dh_prev.data());
            detail::add_matvec_t(ur_, dar.data(), dh_prev.data());

            double* dxt = &dx.data[t * in_];
            detail::add_matvec_t(wz_, daz.data(), dxt);
            detail::add_matvec_t(wr_, dar.data(), dxt);
            detail::add_matvec_t(wh_, dah.data(), dxt);

            dh = dh_prev;
        }
        return dx;
    }

    std::vector<param_ref> params() override {
        return {{name_ + ".Wz", &wz_, &gwz_}, {name_ + ".Uz", &uz_, &guz_},
                {name_ + ".bz", &bz_, &gbz_}, {name_ + ".Wr", &wr_, &gwr_},
                {name_ + ".Ur", &ur_, &gur_}, {name_ + ".br", &br_, &gbr_},
                {name_ + ".Wh", &wh_, &gwh_}, {name_ + ".Uh", &uh_, &guh_},
                {name_ + ".bh", &bh_, &gbh_}};
    }

    [[nodiscard]] std::size_t output_width() const override { return units_; }
    [[nodiscard]] bool outputs_sequence() const override { return seq_; }

private:
    std::string name_;
    std::size_t in_, units_;
    activation act_;
    bool seq_;
    tensor wz_, wr_, wh_, uz_, ur_, uh_, bz_, br_, bh_;
    tensor gwz_, gwr_, gwh_, guz_, gur_, guh_, gbz_, gbr_, gbh_;
    tensor x_, h0_, z_, r_, ah_, hc_, h_;
};

/// Long short-term memory layer. Gates are logistic; the configured
/// activation shapes both the candidate and the cell output:
///   i, f, o = sigmoid(W x + U h + b)
///   g  = act(Wg x + Ug h + bg)
///   c' = f * c + i * g
///   h' = o * act(c')
class lstm_layer : public layer {
public:
    lstm_layer(std::string name, std::size_t in, std::size_t units, activation act,
               bool return_sequences)
        : name_(std::move(name)), in_(in), units_(units), act_(act), seq_(return_sequences) {
        for (tensor* t : {&wi_, &wf_, &wo_, &wg_, &gwi_, &gwf_, &gwo_, &gwg_})
            *t = tensor::matrix(units, in);
        for (tensor* t : {&ui_, &uf_, &uo_, &ug_, &gui_, &guf_, &guo_, &gug_})
            *t = tensor::matrix(units, units);
        for (tensor* t : {&bi_, &bf_, &bo_, &bg_, &gbi_, &gbf_, &gbo_, &gbg_})
            *t = tensor::zeros({units});
    }

    void init(rng& r) override {
        for (tensor* t : {&wi_, &wf_, &wo_, &wg_, &ui_, &uf_, &uo_, &ug_})
            detail::glorot_fill(*t, r);
    }

    /// Sets gate biases directly; used by tests to pin gates open or closed.
    void set_gate_biases(double input_gate, double forget_gate, double output_gate) {
        bi_.fill(input_gate);
        bf_.fill(forget_gate);
        bo_.fill(output_gate);
    }

    tensor forward(const tensor& x) override {
        return forward_from(x, tensor::zeros({units_}), tensor::zeros({units_}));
    }

    /// Forward pass with explicit initial hidden and cell states, exposed for
    /// unit-level verification of the recurrence.
    tensor forward_from(const tensor& x, const tensor& h0, const tensor& c0) {
        if (x.rank() != 2 || x.cols() != in_)
            throw std::runtime_error(name_ + ": expected input width " + std::to_string(in_) +
                                     ", got " + std::to_string(x.cols()));
        if (h0.size() != units_ || c0.size() != units_)
            throw std::runtime_error(name_ + ": bad initial state size");
        x_ = x;
        const std::size_t steps = x.rows();
        i_ = tensor::matrix(steps, units_);
        f_ = tensor::matrix(steps, units_);
        o_ = tensor::matrix(steps, units_);
        ag_ = tensor::matrix(steps, units_);
        g_ = tensor::matrix(steps, units_);
        c_ = tensor::matrix(steps, units_);
        fc_ = tensor::matrix(steps, units_); // act(c), reused by backward
        h_ = tensor::matrix(steps, units_);
        h0_ = h0;
        c0_ = c0;

        const double* h_prev = h0_.data.data();
        const double* c_prev = c0_.data.data();
        for (std::size_t t = 0; t < steps; ++t) {
            const double* xt = &x.data[t * in_];
            double* it = &i_.data[t * units_];
            double* ft = &f_.data[t * units_];
            double* ot = &o_.data[t * units_];
            double* agt = &ag_.data[t * units_];
            double* gt = &g_.data[t * units_];
            double* ct = &c_.data[t * units_];
            double* fct = &fc_.data[t * units_];
            double* ht = &h_.data[t * units_];

            const auto gate = [&](double* dst, const tensor& w, const tensor& u,
                                  const tensor& b) {
                for (std::size_t k = 0; k < units_; ++k) dst[k] = b.data[k];
                detail::add_matvec(w, xt, dst);
                detail::add_matvec(u, h_prev, dst);
            };
            gate(it, wi_, ui_, bi_);
            gate(ft, wf_, uf_, bf_);
            gate(ot, wo_, uo_, bo_);
            gate(agt, wg_, ug_, bg_);
            for (std::size_t k = 0; k < units_; ++k) {
                it[k] = sigmoid(it[k]);
                ft[k] = sigmoid(ft[k]);
                ot[k] = sigmoid(ot[k]);
                gt[k] = apply_activation(act_, agt[k]);
                ct[k] = ft[k] * c_prev[k] + it[k] * gt[k];
                fct[k] = apply_activation(act_, ct[k]);
                ht[k] = ot[k] * fct[k];
            }
            h_prev = ht;
            c_prev = ct;
        }

        if (seq_) return h_;
        tensor out = tensor::zeros({1, units_});
        for (std::size_t k = 0; k < units_; ++k) out.data[k] = h_(steps - 1, k);
        return out;
    }

    tensor backward(const tensor& dy) override {
        const std::size_t steps = x_.rows();
        tensor dx = tensor::matrix(steps, in_);
        std::vector<double> dh(units_, 0.0), dc(units_, 0.0), dh_prev(units_), dc_prev(units_),
            dai(units_), daf(units_), dao(units_), dag(units_);

        for (std::size_t t = steps; t-- > 0;) {
            if (seq_) {
                for (std::size_t k = 0; k < units_; ++k) dh[k] += dy(t, k);
            } else if (t == steps - 1) {
                for (std::size_t k = 0; k < units_; ++k) dh[k] += dy.data[k];
            }
            const double* h_prev = (t == 0) ? h0_.data.data() : &h_.data[(t - 1) * units_];
            const double* c_prev = (t == 0) ? c0_.data.data() : &c_.data[(t - 1) * units_];
            const double* xt = &x_.data[t * in_];

            for (std::size_t k = 0; k < units_; ++k) {
                const double i = i_(t, k), f = f_(t, k), o = o_(t, k), g = g_(t, k);
                const double dco = dh[k] * o * activation_derivative(act_, c_(t, k), fc_(t, k));
                const double dck = dco + dc[k];
                dao[k] = dh[k] * fc_(t, k) * o * (1.0 - o);
                daf[k] = dck * c_prev[k] * f * (1.0 - f);
                dai[k] = dck * g * i * (1.0 - i);
                dag[k] = dck * i * activation_derivative(act_, ag_(t, k), g);
                dc_prev[k] = dck * f;
            }
            detail::add_outer(gwi_, dai.data(), xt);
            detail::add_outer(gwf_, daf.data(), xt);
            detail::add_outer(gwo_, dao.data(), xt);
            detail::add_outer(gwg_, dag.data(), xt);
            detail::add_outer(gui_, dai.data(), h_prev);
            detail::add_outer(guf_, daf.data(), h_prev);
            detail::add_outer(guo_, dao.data(), h_prev);
            detail::add_outer(gug_, dag.data(), h_prev);
            for (std::size_t k = 0; k < units_; ++k) {
                gbi_.data[k] += dai[k];
                gbf_.data[k] += daf[k];
                gbo_.data[k] += dao[k];
                gbg_.data[k] += dag[k];
            }
            std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
            detail::add_matvec_t(ui_, dai.data(), dh_prev.data());
            detail::add_matvec_t(uf_, daf.data(), dh_prev.data());
            detail::add_matvec_t(uo_, dao.data(), dh_prev.data());
            detail::add_matvec_t(ug_, dag.data(), dh_prev.data());

            double* dxt = &dx.data[t * in_];
            detail::add_matvec_t(wi_, dai.data(), dxt);
            detail::add_matvec_t(wf_, daf.data(), dxt);
            detail::add_matvec_t(wo_, dao.data(), dxt);
            detail::add_matvec_t(wg_, dag.data(), dxt);

            dh = dh_prev;
            dc = dc_prev;
        }
        return dx;
    }

    std::vector<param_ref> params() override {
        return {{name_ + ".Wi", &wi_, &gwi_}, {name_ + ".Ui", &ui_, &gui_},
                {name_ + ".bi", &bi_, &gbi_}, {name_ + ".Wf", &wf_, &gwf_},
                {name_ + ".Uf", &uf_, &guf_}, {name_ + ".bf", &bf_, &gbf_},
                {name_ + ".Wo", &wo_, &gwo_}, {name_ + ".Uo", &uo_, &guo_},
                {name_ + ".bo", &bo_, &gbo_}, {name_ + ".Wg", &wg_, &gwg_},
                {name_ + ".Ug", &ug_, &gug_}, {name_ + ".bg", &bg_, &gbg_}};
    }

    [[nodiscard]] std::size_t output_width() const override { return units_; }
    [[nodiscard]] bool outputs_sequence() const override { return seq_; }

private:
    std::string name_;
    std::size_t in_, units_;
    activation act_;
    bool seq_;
    tensor wi_, wf_, wo_, wg_, ui_, uf_, uo_, ug_, bi_, bf_, bo_, bg_;
    tensor gwi_, gwf_, gwo_, gwg_, gui_, guf_, guo_, gug_, gbi_, gbf_, gbo_, gbg_;
    tensor x_, h0_, c0_, i_, f_, o_, ag_, g_, c_, fc_, h_;
};

} // namespace pecf::nn
