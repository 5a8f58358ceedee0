#include "expdiff/link.hpp"

#include <cmath>
#include <sstream>

#include "expdiff/errors.hpp"
#include "expdiff/special.hpp"

namespace expdiff {

LinkSpec LinkSpec::parse(const std::string& text) {
    // Reuse the family tag grammar: name{key=value,...}.
    auto brace = text.find('{');
    std::string name = brace == std::string::npos ? text : text.substr(0, brace);
    auto get_param = [&](const char* key, double fallback) {
        if (brace == std::string::npos) return fallback;
        if (text.back() != '}') throw ConfigError("malformed link spec: " + text);
        std::string body = text.substr(brace + 1, text.size() - brace - 2);
        std::stringstream ss(body);
        std::string item;
        double out = fallback;
        bool seen_any = false;
        while (std::getline(ss, item, ',')) {
            auto eq = item.find('=');
            if (eq == std::string::npos)
                throw ConfigError("expected key=value in link spec: " + text);
            std::string k = item.substr(0, eq);
            if (k != key)
                throw ConfigError("parameter '" + k + "' not valid for link " + name);
            try {
                out = std::stod(item.substr(eq + 1));
            } catch (const std::exception&) {
                throw ConfigError("bad numeric value in link spec: " + text);
            }
            seen_any = true;
        }
        (void)seen_any;
        return out;
    };

    LinkSpec l;
    if (name == "identity") {
        l.kind = LinkKind::identity;
        if (brace != std::string::npos)
            throw ConfigError("identity link takes no parameters: " + text);
    } else if (name == "exp") {
        l.kind = LinkKind::exp_link;
        l.shift = get_param("shift", 0.0);
    } else if (name == "inv_exp") {
        l.kind = LinkKind::inv_exp;
        if (brace != std::string::npos)
            throw ConfigError("inv_exp link takes no parameters: " + text);
    } else if (name == "sigmoid") {
        l.kind = LinkKind::scaled_sigmoid;
        l.scale = get_param("s", 1.0);
        if (!(l.scale > 0)) throw ConfigError("sigmoid scale s must be > 0");
    } else if (name == "gamma") {
        l.kind = LinkKind::scaled_gamma_shape;
        l.a = get_param("a", 1.0);
        if (!(l.a > 0)) throw ConfigError("gamma link shape a must be > 0");
    } else if (name == "pareto") {
        l.kind = LinkKind::shifted_inv_exp;
        l.xm = get_param("xm", 1.0);
        if (!(l.xm > 0)) throw ConfigError("pareto link scale xm must be > 0");
    } else {
        throw ConfigError("unknown link: " + name);
    }
    return l;
}

std::string LinkSpec::str() const {
    std::ostringstream os;
    switch (kind) {
        case LinkKind::identity:
            os << "identity";
            break;
        case LinkKind::exp_link:
            os << "exp";
            if (shift != 0.0) os << "{shift=" << shift << "}";
            break;
        case LinkKind::inv_exp:
            os << "inv_exp";
            break;
        case LinkKind::scaled_sigmoid:
            os << "sigmoid{s=" << scale << "}";
            break;
        case LinkKind::scaled_gamma_shape:
            os << "gamma{a=" << a << "}";
            break;
        case LinkKind::shifted_inv_exp:
            os << "pareto{xm=" << xm << "}";
            break;
    }
    return os.str();
}

double inv_link_scalar(const LinkSpec& l, double x) {
    if (!std::isfinite(x))
        throw DomainError("inv_link: non-finite latent value");
    switch (l.kind) {
        case LinkKind::identity:
            return x;
        case LinkKind::exp_link:
            return std::exp(x + l.shift);
        case LinkKind::inv_exp:
            return std::exp(-x);
        case LinkKind::scaled_sigmoid:
            return logistic(l.scale * x);
        case LinkKind::shifted_inv_exp: {
            const double denom = std::exp(x) - std::log(l.xm);
            if (!(denom > 0))
                throw DomainError("pareto link: exp(x) <= log(xm) at x = " +
                                  std::to_string(x));
            return 1.0 / denom;
        }
        case LinkKind::scaled_gamma_shape:
            return l.a * std::exp(-x);
    }
    return x;
}

double link_scalar(const LinkSpec& l, double theta) {
    switch (l.kind) {
        case LinkKind::identity:
            return theta;
        case LinkKind::exp_link:
            if (!(theta > 0)) throw DomainError("exp link: theta must be > 0");
            return std::log(theta) - l.shift;
        case LinkKind::inv_exp:
            if (!(theta > 0)) throw DomainError("inv_exp link: theta must be > 0");
            return -std::log(theta);
        case LinkKind::scaled_sigmoid:
            if (!(theta > 0 && theta < 1))
                throw DomainError("sigmoid link: theta must be in (0,1)");
            return std::log(theta / (1.0 - theta)) / l.scale;
        case LinkKind::shifted_inv_exp:
            if (!(theta > 0))
                throw DomainError("pareto link: theta must be > 0");
            return std::log(1.0 / theta + std::log(l.xm));
        case LinkKind::scaled_gamma_shape:
            if (!(theta > 0)) throw DomainError("gamma link: theta must be > 0");
            return std::log(l.a / theta);
    }
    return theta;
}

double inv_link_deriv(const LinkSpec& l, double x) {
    switch (l.kind) {
        case LinkKind::identity:
            return 1.0;
        case LinkKind::exp_link:
            return std::exp(x + l.shift);
        case LinkKind::inv_exp:
            return -std::exp(-x);
        case LinkKind::scaled_sigmoid: {
            const double s = logistic(l.scale * x);
            return l.scale * s * (1.0 - s);
        }
        case LinkKind::shifted_inv_exp: {
            const double ex = std::exp(x);
            const double denom = ex - std::log(l.xm);
            if (!(denom > 0))
                throw DomainError("pareto link: exp(x) <= log(xm)");
            return -ex / (denom * denom);
        }
        case LinkKind::scaled_gamma_shape:
            return -l.a * std::exp(-x);
    }
    return 1.0;
}

Vec inv_link(const LinkSpec& l, const Vec& x) {
    Vec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = inv_link_scalar(l, x[i]);
    return out;
}

Vec link(const LinkSpec& l, const Vec& theta) {
    Vec out(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i)
        out[i] = link_scalar(l, theta[i]);
    return out;
}

LinkSpec default_link(const LikelihoodFamily& f, double sigmoid_scale) {
    LinkSpec l;
    switch (f.kind) {
        case FamilyKind::normal_fixed_var:
        case FamilyKind::lognormal_fixed_var:
            l.kind = LinkKind::identity;
            break;
        case FamilyKind::poisson:
            l.kind = LinkKind::exp_link;
            break;
        case FamilyKind::exponential:
            l.kind = LinkKind::inv_exp;
            break;
        case FamilyKind::gamma_fixed_shape:
            l.kind = LinkKind::scaled_gamma_shape;
            l.a = f.a;
            break;
        case FamilyKind::pareto_fixed_scale:
            l.kind = LinkKind::shifted_inv_exp;
            l.xm = f.xm;
            break;
        case FamilyKind::binomial:
        case FamilyKind::negbinomial:
        case FamilyKind::geometric:
            l.kind = LinkKind::scaled_sigmoid;
            l.scale = sigmoid_scale;
            break;
        case FamilyKind::normal_fixed_mean:
        case FamilyKind::lognormal_fixed_mean:
        case FamilyKind::weibull_fixed_shape:
            l.kind = LinkKind::exp_link;
            break;
    }
    return l;
}

std::pair<Vec, Vec> t_theta(const LikelihoodFamily& f, const LinkSpec& l,
                            const Vec& x0) {
    Vec eta(x0.size()), neg_ay(x0.size());
    for (std::size_t j = 0; j < x0.size(); ++j) {
        const double theta = inv_link_scalar(l, x0[j]);
        if (!theta_in_domain(f, theta))
            throw DomainError(f.str() + ": link output " + std::to_string(theta) +
                              " outside parameter space");
        eta[j] = natural_param(f, theta);
        neg_ay[j] = -lik_log_partition(f, theta);
    }
    return {std::move(eta), std::move(neg_ay)};
}

}  // namespace expdiff
