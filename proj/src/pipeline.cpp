#include "credo/pipeline.hpp"

#include <algorithm>
#include <sstream>

#include "credo/errors.hpp"
#include "credo/propagation.hpp"

namespace credo {

namespace {

double scalar_binding(const Model& m, const std::string& name, double fallback) {
    const Binding* b = m.find_binding(name);
    if (b && b->value && b->value->is_scalar()) return b->value->scalar();
    return fallback;
}

}  // namespace

CarParams params_from_model(const Model& m) {
    CarParams p;
    p.r = scalar_binding(m, "r", p.r);
    p.l_f = scalar_binding(m, "lf", p.l_f);
    p.l_r = scalar_binding(m, "lr", p.l_r);
    p.i_w = scalar_binding(m, "Iw", p.i_w);
    p.mass = scalar_binding(m, "m", p.mass);
    p.i_z = scalar_binding(m, "Iz", p.i_z);
    const double cx = scalar_binding(m, "Cx", p.c_xf);
    p.c_xf = scalar_binding(m, "CxF", cx);
    p.c_xr = scalar_binding(m, "CxR", cx);
    const double ca = scalar_binding(m, "Calpha", p.c_af);
    p.c_af = scalar_binding(m, "CaF", ca);
    p.c_ar = scalar_binding(m, "CaR", ca);
    p.delta = scalar_binding(m, "delta", p.delta);
    p.c_sat = scalar_binding(m, "c_sat", p.c_sat);
    p.validate();
    return p;
}

std::map<std::string, ExternalFn> external_bindings(const CarParams& p) {
    std::map<std::string, ExternalFn> fns;
    fns["f_func"] = [p](const std::vector<Matrix>& args) {
        return plant_f(args.at(0), args.at(1), p);
    };
    fns["dphi_func"] = [p](const std::vector<Matrix>& args) {
        return dphi_transposed(args.at(0), args.at(1), p);
    };
    fns["friction_func"] = [p](const std::vector<Matrix>& args) {
        return friction_forces(args.at(0), args.at(1), p);
    };
    return fns;
}

PipelineResult run_autocode(const Model& parsed, const PipelineOptions& opts) {
    PipelineResult out;
    out.model = parsed;
    Model& m = out.model;

    out.params = params_from_model(m);
    out.dt = opts.dt_override > 0.0 ? opts.dt_override : scalar_binding(m, "dt", 0.01);
    if (Binding* dtb = m.find_binding("dt"); dtb && opts.dt_override > 0.0) {
        dtb->value = Matrix{{out.dt}};
    }

    // ---- equilibrium refinement -------------------------------------------------
    const Binding* xss = m.find_binding("xss");
    const Binding* uss = m.find_binding("uss");
    const bool needs_equilibrium =
        xss || uss ||
        std::any_of(m.annotations.begin(), m.annotations.end(),
                    [](const AnnotationBlock& a) { return a.auto_linear; });
    if (needs_equilibrium) {
        if (!xss || !xss->value || !uss || !uss->value) {
            throw ValidationError("model needs 'xss' and 'uss' equilibrium candidates");
        }
        out.eq = verify_equilibrium(*xss->value, *uss->value, out.params);
        m.find_binding("xss")->value = out.eq.x_ss;
        m.find_binding("uss")->value = out.eq.u_ss;
    }

    // ---- resolve auto linear plants (Euler-discretized linearization) ------------
    for (AnnotationBlock& a : m.annotations) {
        if (a.kind != AnnotationKind::LinearPlant) continue;
        out.has_linear_loop = true;
        if (a.auto_linear) {
            const CarParams p = out.params;
            const VectorField f = [p](const Matrix& x, const Matrix& u) {
                return plant_f(x, u, p);
            };
            const JacobianPair j = jacobian_fd(f, out.eq.x_ss, out.eq.u_ss);
            out.a_cont = j.a;
            out.b_cont = j.b;
            a.a = Matrix::identity(3) + j.a * out.dt;
            a.b = j.b * out.dt;
            a.auto_linear = false;
        }
        out.a_disc = *a.a;
        out.b_disc = *a.b;
    }

    // ---- LQR gain for auto K ------------------------------------------------------
    if (Binding* k = m.find_binding("K"); k && k->is_auto) {
        if (!out.has_linear_loop) {
            throw ValidationError("binding K = auto needs a linear plant to design against");
        }
        Matrix qw = Matrix::identity(out.a_disc.rows());
        Matrix rw = Matrix::identity(out.b_disc.cols());
        if (const Binding* q = m.find_binding("lqr_Q"); q && q->value) qw = *q->value;
        if (const Binding* r = m.find_binding("lqr_R"); r && r->value) rw = *r->value;
        out.lqr = lqr_gain(out.a_disc, out.b_disc, qw, rw);
        // the gain block computes utilde = K xtilde; feedback law is -K_lqr
        k->value = -out.lqr.gain;
        k->is_auto = false;
    } else if (out.has_linear_loop) {
        // explicit gain: recover the design-convention K for synthesis
        const Binding* kb = m.find_binding("K");
        if (kb && kb->value) out.lqr.gain = -*kb->value;
    }

    // ---- validation ----------------------------------------------------------------
    const ValidateResult v = validate_model(m);
    if (!v.ok()) {
        std::ostringstream os;
        os << "model validation failed:";
        for (const Diagnostic& d : v.diagnostics) os << "\n  " << to_string(d);
        throw ValidationError(os.str());
    }
    out.loops = v.loops;

    // ---- invariants per loop ---------------------------------------------------------
    if (const Binding* ib = m.find_binding("init_box"); ib && ib->value) {
        for (std::size_t i = 0; i < ib->value->rows(); ++i) {
            out.init_box.push_back((*ib->value)[i]);
        }
    } else if (out.has_linear_loop) {
        out.init_box.assign(out.a_disc.rows(), 0.1);
    }
    for (std::size_t li = 0; li < out.loops.size(); ++li) {
        Loop& loop = out.loops[li];
        const AnnotationBlock& plant = m.annotations.at(loop.plant);
        const std::string id = "loop" + std::to_string(li + 1);
        if (plant.kind == AnnotationKind::LinearPlant) {
            if (!loop.invariant_known) {
                try {
                    const Ellipsoid p = synthesize_linear_invariant(
                        *plant.a, *plant.b, out.lqr.gain, out.init_box);
                    out.invariant_p = p.shape();
                    out.has_invariant = true;
                    loop.invariant = pred_le(
                        quad(p.shape(), var(plant.plant_outputs.at(0)), "P"), cst(1.0));
                    loop.invariant_known = true;
                } catch (const Error& err) {
                    out.loop_errors.push_back(id + ": invariant synthesis failed: " +
                                              err.what());
                }
            } else {
                // explicit ellipsoid observer: reuse its shape matrix
                for (const Comparison& c : loop.invariant.conjuncts) {
                    if (c.lhs->kind == ExprKind::Quad) {
                        out.invariant_p = c.lhs->value;
                        out.has_invariant = true;
                    }
                }
            }
        } else if (!loop.invariant_known) {
            throw ValidationError(id + ": general loops need a general observer invariant");
        }
    }

    // ---- code generation and contract placement ---------------------------------------
    AnnotatedProgram prog = generate_program(m, out.loops);
    if (out.has_invariant) prog.constants["P"] = out.invariant_p;
    prog.constants["dt"] = Matrix{{out.dt}};
    prog.constants["Iw"] = Matrix{{out.params.i_w}};
    prog = place_annotations(prog, m, out.loops, {}, /*skip_missing_invariants=*/true);

    // ---- propagation ---------------------------------------------------------------------
    for (std::size_t li = 0; li < out.loops.size(); ++li) {
        const Loop& loop = out.loops[li];
        const AnnotationBlock& plant = m.annotations.at(loop.plant);
        const std::string id = "loop" + std::to_string(li + 1);
        try {
            if (plant.kind == AnnotationKind::LinearPlant && out.has_invariant) {
                ForwardResult fwd = propagate_linear_forward(prog, m, loop, id,
                                                             Ellipsoid(out.invariant_p), "P");
                out.q1 = fwd.q1;
                out.q2 = fwd.q2;
                prog = std::move(fwd.prog);
                for (PropagationStep& s : fwd.steps) out.steps.push_back(std::move(s));
            } else if (plant.kind == AnnotationKind::GeneralPlant) {
                BackwardResult bwd = propagate_backward(prog, loop, id, loop.invariant);
                prog = std::move(bwd.prog);
                for (PropagationStep& s : bwd.steps) out.steps.push_back(std::move(s));
            }
        } catch (const Error& err) {
            out.loop_errors.push_back(id + ": " + err.what());
        }
    }

    // ---- physical domain facts --------------------------------------------------------------
    const double s_max = scalar_binding(m, "s_max", 2.0);
    const double slip_floor = out.params.slip_floor;
    for (const Signal& s : m.signals) {
        if (s.name == "u" && s.rows == 2) {
            DomainFact f;
            f.var = "u";
            f.box = {Interval(slip_floor, s_max), Interval(slip_floor, s_max)};
            f.provenance = "slip_assumption";
            out.facts.push_back(std::move(f));
        }
    }

    // ---- emission and the verifier-facing surface ----------------------------------------------
    out.program = prog;
    out.matlab_text = emit_text(prog, EmitStyle::MatlabLike);
    out.vc_text = write_vc_text(VcFile{prog, out.steps, out.facts});

    // the verifier consumes the machine-vc file, so generate the VCs from a
    // re-parse of the emitted text (also exercising the round trip)
    const VcFile parsed_back = parse_vc(out.vc_text);
    out.vcs = gen_vcs(parsed_back.prog, parsed_back.steps, parsed_back.facts);
    for (VC& vc : out.vcs) vc.fns = external_bindings(out.params);

    return out;
}

PipelineResult run_autocode_file(const std::string& model_text, const PipelineOptions& opts) {
    const ParseResult r = parse_model(model_text);
    if (!r.ok()) {
        std::ostringstream os;
        os << "model rejected:";
        for (const Diagnostic& d : r.diagnostics) os << "\n  " << to_string(d);
        throw ParseError(os.str());
    }
    return run_autocode(*r.model, opts);
}

}  // namespace credo
