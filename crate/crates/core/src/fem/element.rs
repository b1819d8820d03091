//! Single-element quantities of the 2D Euler-Bernoulli frame element.
//!
//! DOF order per element is (ux_i, uy_i, θ_i, ux_j, uy_j, θ_j).

use super::FemError;

pub type Mat6 = [[f64; 6]; 6];
pub type Vec6 = [f64; 6];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementGeometry {
    pub length: f64,
    pub c: f64,
    pub s: f64,
}

pub fn element_geometry(xi: f64, yi: f64, xj: f64, yj: f64) -> Result<ElementGeometry, FemError> {
    let (dx, dy) = (xj - xi, yj - yi);
    let length = dx.hypot(dy);
    if !(length > 0.0) {
        return Err(FemError::ZeroLength { at: [xi, yi], element: None });
    }
    Ok(ElementGeometry { length, c: dx / length, s: dy / length })
}

/// Local stiffness matrix: axial EA/L plus the Hermitian bending block.
pub fn local_stiffness(e: f64, a: f64, i: f64, l: f64) -> Mat6 {
    let ea = e * a / l;
    let k1 = 12.0 * e * i / (l * l * l);
    let k2 = 6.0 * e * i / (l * l);
    let k3 = 4.0 * e * i / l;
    let k4 = 2.0 * e * i / l;
    [
        [ea, 0.0, 0.0, -ea, 0.0, 0.0],
        [0.0, k1, k2, 0.0, -k1, k2],
        [0.0, k2, k3, 0.0, -k2, k4],
        [-ea, 0.0, 0.0, ea, 0.0, 0.0],
        [0.0, -k1, -k2, 0.0, k1, -k2],
        [0.0, k2, k4, 0.0, -k2, k3],
    ]
}

/// Rotation taking global element DOFs to local ones.
pub fn transformation(g: &ElementGeometry) -> Mat6 {
    let (c, s) = (g.c, g.s);
    let mut t = [[0.0; 6]; 6];
    for base in [0, 3] {
        t[base][base] = c;
        t[base][base + 1] = s;
        t[base + 1][base] = -s;
        t[base + 1][base + 1] = c;
        t[base + 2][base + 2] = 1.0;
    }
    t
}

pub fn mat_vec(m: &Mat6, v: &Vec6) -> Vec6 {
    let mut out = [0.0; 6];
    for (r, row) in m.iter().enumerate() {
        out[r] = row.iter().zip(v).map(|(a, b)| a * b).sum();
    }
    out
}

pub fn mat_t_vec(m: &Mat6, v: &Vec6) -> Vec6 {
    let mut out = [0.0; 6];
    for c in 0..6 {
        out[c] = (0..6).map(|r| m[r][c] * v[r]).sum();
    }
    out
}

/// Tᵀ·k·T.
pub fn global_stiffness(k_local: &Mat6, g: &ElementGeometry) -> Mat6 {
    let t = transformation(g);
    let mut kt = [[0.0; 6]; 6];
    for r in 0..6 {
        for c in 0..6 {
            kt[r][c] = (0..6).map(|m| k_local[r][m] * t[m][c]).sum();
        }
    }
    let mut out = [[0.0; 6]; 6];
    for r in 0..6 {
        for c in 0..6 {
            out[r][c] = (0..6).map(|m| t[m][r] * kt[m][c]).sum();
        }
    }
    out
}

/// Loads from a uniform local-y intensity `w` on an element of length `l`.
///
/// Returns the equivalent nodal loads in global axes and the fixed-end
/// forces (forces the clamps exert on the member) in local axes.
pub fn equivalent_nodal_loads(w: f64, l: f64, g: &ElementGeometry) -> (Vec6, Vec6) {
    let v = w * l / 2.0;
    let m = w * l * l / 12.0;
    let fixed_end = [0.0, -v, -m, 0.0, -v, m];
    let equivalent_local = fixed_end.map(|f| -f);
    let equivalent_global = mat_t_vec(&transformation(g), &equivalent_local);
    (equivalent_global, fixed_end)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Cubic Hermite shape functions on [0, L] and their second derivatives.
    fn hermite(x: f64, l: f64) -> ([f64; 4], [f64; 4]) {
        let xi = x / l;
        let n = [
            1.0 - 3.0 * xi * xi + 2.0 * xi.powi(3),
            l * (xi - 2.0 * xi * xi + xi.powi(3)),
            3.0 * xi * xi - 2.0 * xi.powi(3),
            l * (-xi * xi + xi.powi(3)),
        ];
        let d2 = [
            (-6.0 + 12.0 * xi) / (l * l),
            (-4.0 + 6.0 * xi) / l,
            (6.0 - 12.0 * xi) / (l * l),
            (-2.0 + 6.0 * xi) / l,
        ];
        (n, d2)
    }

    /// Five-point Gauss-Legendre rule, exact for degree ≤ 9.
    fn gauss<F: Fn(f64) -> f64>(l: f64, f: F) -> f64 {
        const X: [f64; 5] = [
            0.0,
            -0.538_469_310_105_683_1,
            0.538_469_310_105_683_1,
            -0.906_179_845_938_664,
            0.906_179_845_938_664,
        ];
        const W: [f64; 5] = [
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_5,
            0.478_628_670_499_366_5,
            0.236_926_885_056_189_1,
            0.236_926_885_056_189_1,
        ];
        X.iter()
            .zip(W)
            .map(|(x, w)| w * f(0.5 * l * (x + 1.0)))
            .sum::<f64>()
            * 0.5
            * l
    }

    const BENDING_DOFS: [usize; 4] = [1, 2, 4, 5];

    #[test]
    fn geometry_of_axis_aligned_and_roof_members() {
        let g = element_geometry(0.0, 0.0, 0.0, 4.0).unwrap();
        assert_eq!((g.length, g.c, g.s), (4.0, 0.0, 1.0));
        let g = element_geometry(0.0, 4.0, 6.0, 4.0).unwrap();
        assert_eq!((g.length, g.c, g.s), (6.0, 1.0, 0.0));
        let g = element_geometry(0.0, 4.0, 4.0, 7.0).unwrap();
        assert!((g.length - 5.0).abs() < 1e-15);
        assert!((g.c - 0.8).abs() < 1e-15 && (g.s - 0.6).abs() < 1e-15);
        assert!(matches!(element_geometry(1.0, 1.0, 1.0, 1.0), Err(FemError::ZeroLength { .. })));
    }

    #[test]
    fn unit_stiffness_matches_hermite_integration() {
        let k = local_stiffness(1.0, 1.0, 1.0, 1.0);
        for (a, &ra) in BENDING_DOFS.iter().enumerate() {
            for (b, &rb) in BENDING_DOFS.iter().enumerate() {
                let oracle = gauss(1.0, |x| {
                    let (_, d2) = hermite(x, 1.0);
                    d2[a] * d2[b]
                });
                assert!((k[ra][rb] - oracle).abs() < 1e-12, "k[{ra}][{rb}]");
            }
        }
        assert_eq!(k[0][0], 1.0);
        assert_eq!(k[1][1], 12.0);
        assert_eq!(k[1][2], 6.0);
        assert_eq!(k[2][2], 4.0);
        assert_eq!(k[2][5], 2.0);
    }

    #[test]
    fn column_stiffness_entries() {
        let k = local_stiffness(2e11, 2e-3, 1.6e-5, 4.0);
        assert!((k[0][0] - 1e8).abs() / 1e8 < 1e-14);
        assert!((k[1][1] - 6e5).abs() / 6e5 < 1e-14);
    }

    #[test]
    fn stiffness_is_symmetric() {
        for (e, a, i, l) in [(2e11, 2e-3, 1.6e-5, 4.0), (7e10, 1e-2, 3e-4, 5.0), (1.0, 2.0, 3.0, 0.7)] {
            let k = local_stiffness(e, a, i, l);
            let g = element_geometry(0.0, 0.0, 3.0, 1.7).unwrap();
            let kg = global_stiffness(&k, &g);
            for r in 0..6 {
                for c in 0..6 {
                    assert_eq!(k[r][c], k[c][r]);
                    assert!((kg[r][c] - kg[c][r]).abs() <= 1e-12 * kg[r][r].abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn consistent_loads_match_shape_function_integrals() {
        for (w, l) in [(-1e4, 6.0), (3.5, 2.0), (1e4, 5.0)] {
            let g = element_geometry(0.0, 0.0, l, 0.0).unwrap();
            let (global, fixed) = equivalent_nodal_loads(w, l, &g);
            for (a, &dof) in BENDING_DOFS.iter().enumerate() {
                let oracle = gauss(l, |x| hermite(x, l).0[a] * w);
                assert!((global[dof] - oracle).abs() <= 1e-9 * oracle.abs().max(1.0));
                assert!((fixed[dof] + oracle).abs() <= 1e-9 * oracle.abs().max(1.0));
            }
            assert_eq!(fixed[2], -fixed[5]);
        }
        let g = element_geometry(0.0, 4.0, 6.0, 4.0).unwrap();
        let (_, fixed) = equivalent_nodal_loads(-1e4, 6.0, &g);
        assert!((fixed[1].abs() - 30000.0).abs() < 1e-9);
        assert!((fixed[4].abs() - 30000.0).abs() < 1e-9);
        assert!((fixed[2].abs() - 30000.0).abs() < 1e-9);
        assert!((fixed[5].abs() - 30000.0).abs() < 1e-9);
        let (zero_g, zero_f) = equivalent_nodal_loads(0.0, 6.0, &g);
        assert!(zero_g.iter().chain(&zero_f).all(|v| *v == 0.0));
    }

    #[test]
    fn rotated_loads_keep_resultant() {
        let g = element_geometry(0.0, 4.0, 4.0, 7.0).unwrap();
        let (global, _) = equivalent_nodal_loads(-1e4, g.length, &g);
        // resultant of w·L along local +y = (-s, c)
        let fx = global[0] + global[3];
        let fy = global[1] + global[4];
        assert!((fx - (-1e4 * 5.0 * -0.6)).abs() < 1e-8);
        assert!((fy - (-1e4 * 5.0 * 0.8)).abs() < 1e-8);
    }
}
