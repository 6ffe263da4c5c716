//! Static descriptions of the available checks: the statement being tested,
//! its hypotheses, and the tolerance policy applied on the grid.

pub struct CheckDescription {
    pub id: &'static str,
    pub statement: &'static str,
    pub hypotheses: &'static str,
    pub tolerance: &'static str,
}

pub const DESCRIPTIONS: &[CheckDescription] = &[
    CheckDescription {
        id: "CircleExtinction",
        statement: "A circle of radius r0 flowing by curvature vanishes at time r0^2/2; \
                    the solver's extinction time must match within the configured tolerance.",
        hypotheses: "2-d run, no transport, circle well inside the box.",
        tolerance: "Configured absolute time tolerance (bundled: 0.01 at h = 1/128).",
    },
    CheckDescription {
        id: "ShrinkingBall",
        statement: "For any weak set flow Z and point p, min(eps, dist(Z(t), p))^2 + c t is \
                    nondecreasing with c = 2m + 0.5; backward corollary: if p is in Z(T) then \
                    min(eps, dist(Z(t), p))^2 <= c (T - t) for t < T.",
        hypotheses: "eps capped at the band width; c exceeds twice the boundary dimension.",
        tolerance: "Additive slack 4h against front placement error.",
    },
    CheckDescription {
        id: "FiniteSpeed",
        statement: "If dist(Z(0), p) > R then dist(Z(t), p) > R - (2m/r + chi) t for every \
                    r in (0, R) while t <= (R - r)/(2m/r + chi); 2m/r is the curvature of a \
                    sphere of radius r/2 and chi bounds |X|.",
        hypotheses: "chi is the sampled sup of |X| over the run box.",
        tolerance: "Additive slack 4h; r scanned at R/4, R/2, 3R/4.",
    },
    CheckDescription {
        id: "Avoidance",
        statement: "Initially disjoint weak set flows stay disjoint while one is compact.",
        hypotheses: "Initial gap above 4h; both sets away from the frozen margin.",
        tolerance: "Strict disjointness: every sampled gap at least h/2.",
    },
    CheckDescription {
        id: "LongTime",
        statement: "dist(Y(t), Z(t)) >= e^(lambda t) dist(Y(0), Z(0)), with lambda the \
                    sampled lower bound of the symmetrized transport Jacobian (the flat-space \
                    Ricci-with-drift bound).",
        hypotheses: "lambda is always computed from the field over the run box, never supplied.",
        tolerance: "Bound applied to (d0 - 4h) with an extra additive 4h.",
    },
    CheckDescription {
        id: "GapOracle",
        statement: "Measured gaps between circle pairs match an independent ODE integration \
                    of the radius law r' = -1/r + kappa r (with centers carried by the field).",
        hypotheses: "Pair of circles/disks under zero, radial, or rotation transport.",
        tolerance: "3% relative plus 2h node quantization, forward Euler at dt = 1e-6.",
    },
    CheckDescription {
        id: "KeyProposition",
        statement: "Against a subsolution barrier K (Phi <= 0 on its boundary), \
                    dist(Z(t), K(t)) >= e^(lambda t) eta whenever the initial distance exceeds eta.",
        hypotheses: "Barrier classified by boundary sampling; initial gap above 4h.",
        tolerance: "Bound applied to (d0 - 4h) with an extra additive 4h.",
    },
    CheckDescription {
        id: "DistanceTheorem",
        statement: "Through an equidistant separating midsurface M, both half gaps satisfy \
                    dist(Y(t), M(t)) >= (1/2) e^(lambda t) eta and likewise for Z.",
        hypotheses: "M built by the harmonic separator between the initial sets, then evolved.",
        tolerance: "Bound applied to (eta - 4h) with an extra additive 4h.",
    },
    CheckDescription {
        id: "StrongBarrierEquiv",
        statement: "A strong barrier (Phi < 0 everywhere on its boundary) seeded disjoint \
                    from the flow stays disjoint over its whole time interval.",
        hypotheses: "Barrier strength verified by sampling >= 100 boundary points on >= 20 slices.",
        tolerance: "Strict disjointness: every sampled gap at least h/2.",
    },
    CheckDescription {
        id: "FirstContact",
        statement: "Equality-tolerant companion: if the flow touches the barrier at all, the \
                    first contact happens on the barrier boundary with Phi >= -tol there.",
        hypotheses: "Non-strong barriers allowed; contact depth measured against 2h.",
        tolerance: "Configured phi tolerance (bundled 0.15).",
    },
    CheckDescription {
        id: "BoundaryFlow",
        statement: "The boundary of the biggest flow of a region is itself a weak set flow: \
                    its track avoids a panel of strong shrinking balls seeded disjoint from it, \
                    and matches the directly evolved interface within one cell.",
        hypotheses: "Region with a smooth-at-grid-scale boundary; panel of >= 6 barriers.",
        tolerance: "Gap at least h/2 per barrier; one-cell (h sqrt(dim)) Hausdorff match.",
    },
    CheckDescription {
        id: "Semigroup",
        statement: "F_(s+t)(C) = F_t(F_s(C)): running to s + t directly agrees with stopping \
                    at s, re-extracting, and running to t.",
        hypotheses: "Region mask C; the restart re-distances the stopped field.",
        tolerance: "Hausdorff distance at most 3h between the two final masks.",
    },
    CheckDescription {
        id: "Containment",
        statement: "Level sets {u = a} of one level-set solve are pairwise disjoint weak flows, \
                    and the zero level equals the directly computed flow of the interface.",
        hypotheses: "Levels within half the band width of zero.",
        tolerance: "Pairwise gaps at least h/2; zero level within one cell; level pairs \
                    closer than 2.5h are reported unresolved, not failed.",
    },
    CheckDescription {
        id: "Compactness",
        statement: "The empty set stays empty under evolution, for every built-in transport field.",
        hypotheses: "Fields with bounded gradient (validated at load).",
        tolerance: "Exact: any nonempty sample fails.",
    },
    CheckDescription {
        id: "BrakkeInequality",
        statement: "For nonnegative C^2 compactly supported phi, the forward quotient of the \
                    phi-mass of the moving curve is at most the integral of \
                    phi_t + grad(phi).X - Div_M grad(phi) + phi Div_M X - phi |H|^2; equality \
                    holds for smooth flows. The pre- and post-integration-by-parts forms of \
                    the right side must also agree.",
        hypotheses: "Polygonal curve track from the curvature-plus-transport stepper.",
        tolerance: "Violation allowance 5% (|lhs| + |rhs|) + 1e-6; form agreement within 1%; \
                    refinement (2x vertices, dt/4) moves each side by at most the coarse gap.",
    },
    CheckDescription {
        id: "BrakkeWeakFlow",
        statement: "The support of a curvature-plus-transport curve flow is a weak set flow: \
                    its rasterized track avoids strong barriers seeded disjoint from it.",
        hypotheses: "Curve rasterized to a one-cell band on the scenario grid.",
        tolerance: "Gap at least h/2 per barrier.",
    },
    CheckDescription {
        id: "Separator",
        statement: "Between closed sets X, Y at distance 2r there is a C^1-quality hypersurface \
                    M with dist(X, M) = dist(Y, M) = r, built from the harmonic interpolant on \
                    the band between their (r - delta)-neighborhoods; across pinch points the \
                    interpolant's gradient lines up with the through-going segment direction.",
        hypotheses: "Nonempty sets with gap above 4h; band refined with delta halved twice.",
        tolerance: "Separation proved by flood fill; equidistance within 3h; normals within \
                    15 degrees near the contact set; annulus profile within 2% of a fitted \
                    radial-log solution.",
    },
    CheckDescription {
        id: "ArrivalTime",
        statement: "A shrinking mean-convex region has a continuous arrival-time function u \
                    with nested superlevel sets {u >= t} equal to the region flow, and level \
                    sets {u = t} without interior.",
        hypotheses: "One-step probe confirms the region immediately enters its own interior.",
        tolerance: "Disk closed form within 3h; nestedness exact; no h^2-flat plateau nodes.",
    },
    CheckDescription {
        id: "BarrierExactness",
        statement: "On the exact shrinking sphere (radius law sqrt(-2 m t)) the quantity \
                    Phi = v - H vanishes; ball families classify as strong/critical/expanding \
                    by the sign of c - 2m; the pinched barrier separates quadratically with \
                    the configured rate c.",
        hypotheses: "Analytic barrier library, boundary points Newton-projected to |f| <= 1e-8.",
        tolerance: "|Phi| <= 1e-10 on the exact solution; separation ratio within 20% of c.",
    },
];

pub fn describe(id: &str) -> Option<String> {
    DESCRIPTIONS.iter().find(|d| d.id == id).map(|d| {
        format!(
            "{}\n\nstatement:\n  {}\n\nhypotheses:\n  {}\n\ntolerance policy:\n  {}\n",
            d.id, d.statement, d.hypotheses, d.tolerance
        )
    })
}

pub fn known_ids() -> Vec<&'static str> {
    DESCRIPTIONS.iter().map(|d| d.id).collect()
}
