//! Device Hamiltonians: two-level bipartite pairs in the dressed basis and
//! chains of anharmonic (transmon) oscillators with exchange couplings.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{self, CMat, DIM_CAP};
use crate::pulse::Pulse;
use crate::units;

// --- two-level bipartite pair ------------------------------------------------

/// Two coupled two-level systems: intruder (i) and target (t), with
/// H₀ = −(ω_i/2)σz⊗I − (ω_t/2)I⊗σz + g σx⊗σx in the |i t⟩ product basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BipartitePair {
    /// Intruder frequency, rad/ns.
    pub omega_i: f64,
    /// Target frequency, rad/ns.
    pub omega_t: f64,
    /// σx σx coupling, rad/ns.
    pub g: f64,
}

/// Output of the analytic diagonalization of a [`BipartitePair`].
#[derive(Debug, Clone)]
pub struct DressedBasis {
    /// Columns are the dressed states |̃00⟩,|̃01⟩,|̃10⟩,|̃11⟩.
    pub transform: CMat,
    /// Diagonalized Hamiltonian (4×4 diagonal).
    pub h_diag: CMat,
    /// The target raising operator σ_t⁺ in the dressed basis.
    pub ladder: CMat,
}

impl BipartitePair {
    pub fn new(omega_i: f64, omega_t: f64, g: f64) -> Self {
        Self { omega_i, omega_t, g }
    }

    /// Detuning Δ = ω_i − ω_t.
    pub fn detuning(&self) -> f64 {
        self.omega_i - self.omega_t
    }

    /// ε = √(4g² + Δ²).
    pub fn epsilon(&self) -> f64 {
        let d = self.detuning();
        (4.0 * self.g * self.g + d * d).sqrt()
    }

    /// Υ± = √(4g² + (ε ± Δ)²).
    pub fn upsilon(&self) -> (f64, f64) {
        let d = self.detuning();
        let e = self.epsilon();
        let up = (4.0 * self.g * self.g + (e + d) * (e + d)).sqrt();
        let um = (4.0 * self.g * self.g + (e - d) * (e - d)).sqrt();
        (up, um)
    }

    /// Main-transition dipole (Δ+ε)/Υ₊ of the resonantly driven subspace.
    pub fn dipole_main(&self) -> f64 {
        let (up, _) = self.upsilon();
        (self.detuning() + self.epsilon()) / up
    }

    /// Second-subspace dipole 2g/Υ₋.
    pub fn dipole_second(&self) -> f64 {
        let (_, um) = self.upsilon();
        2.0 * self.g / um
    }

    /// The 4×4 lab-frame Hamiltonian.
    pub fn hamiltonian(&self) -> CMat {
        let sz = operator::sigma_z();
        let sx = operator::sigma_x();
        let id = operator::identity(2);
        operator::kron(&(sz.clone() * C64::new(-self.omega_i / 2.0, 0.0)), &id)
            + operator::kron(&id, &(sz * C64::new(-self.omega_t / 2.0, 0.0)))
            + operator::kron(&sx, &sx) * C64::new(self.g, 0.0)
    }

    /// Analytic dressed basis, diagonal Hamiltonian and dressed ladder.
    ///
    /// Entry layout of the ladder follows the coupling-matrix structure:
    /// nonzero at (1,0) = −(Δ+ε)/Υ₊, (2,0) = 2g/Υ₊, (3,1) = (−Δ+ε)/Υ₋,
    /// (3,2) = 2g/Υ₋, up to the A-block (counter-rotating) dressing which
    /// multiplies every entry by cos φ ≈ 1.
    pub fn dressed_basis(&self) -> Result<DressedBasis> {
        let e = self.epsilon();
        if e <= 0.0 {
            return Err(Error::Degenerate(
                "ε = 0: both g and Δ vanish, dressed basis undefined".into(),
            ));
        }
        let d = self.detuning();
        let g = self.g;
        let (up, um) = self.upsilon();
        let _ = um;
        let sigma = self.omega_i + self.omega_t;
        let es = (sigma * sigma + 4.0 * g * g).sqrt();

        // B block {|01⟩,|10⟩}: |̃01⟩ = (−(Δ+ε)|01⟩ + 2g|10⟩)/Υ₊ (lower, −ε/2),
        // |̃10⟩ = (2g|01⟩ + (Δ+ε)|10⟩)/Υ₊ (upper, +ε/2).
        let b_lo = [-(d + e) / up, 2.0 * g / up];
        let b_hi = [2.0 * g / up, (d + e) / up];
        // A block {|00⟩,|11⟩}: mixing angle from g σxσx between |00⟩ and |11⟩.
        let lam_lo = -0.5 * es;
        let denom = (g * g + (lam_lo + 0.5 * sigma) * (lam_lo + 0.5 * sigma)).sqrt();
        let (a_c, a_s) = if g.abs() < 1e-300 {
            (1.0, 0.0)
        } else {
            (g / denom, (lam_lo + 0.5 * sigma) / denom)
        };
        // lower A eigvec (cosφ, −sinφ)-like; keep |00⟩ component positive
        let (mut c0, mut s0) = (a_c, a_s);
        if c0 < 0.0 {
            c0 = -c0;
            s0 = -s0;
        }

        let z = C64::new(0.0, 0.0);
        let cc = |x: f64| C64::new(x, 0.0);
        // columns: |̃00⟩, |̃01⟩, |̃10⟩, |̃11⟩ in bare order (00,01,10,11)
        let transform = CMat::from_column_slice(
            4,
            4,
            &[
                // |̃00⟩ = c0|00⟩ + s0|11⟩
                cc(c0), z, z, cc(s0),
                // |̃01⟩
                z, cc(b_lo[0]), cc(b_lo[1]), z,
                // |̃10⟩
                z, cc(b_hi[0]), cc(b_hi[1]), z,
                // |̃11⟩ = −s0|00⟩ + c0|11⟩
                cc(-s0), z, z, cc(c0),
            ],
        );
        let h_diag = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
            cc(-0.5 * es),
            cc(-0.5 * e),
            cc(0.5 * e),
            cc(0.5 * es),
        ]));
        let bare_ladder = operator::kron(&operator::identity(2), &operator::sigma_plus());
        let ladder = transform.adjoint() * bare_ladder * &transform;
        Ok(DressedBasis { transform, h_diag, ladder })
    }

    /// Conditional splitting δ = (E₁₁−E₁₀) − (E₀₁−E₀₀) from exact
    /// eigenvalues with max-overlap dressed labels. Identically zero for a
    /// two-level σxσx pair; nonzero splittings need multilevel nodes.
    pub fn effective_splitting(&self) -> f64 {
        let h = self.hamiltonian();
        let eig = h.symmetric_eigen();
        let labels = assign_labels(&eig.eigenvectors);
        let e = |bare: usize| eig.eigenvalues[labels[bare]];
        (e(3) - e(2)) - (e(1) - e(0))
    }
}

/// Greedy max-overlap assignment bare index → eigenvector column.
/// Ties (equal overlap) resolve toward the lower bare index.
pub(crate) fn assign_labels(eigenvectors: &CMat) -> Vec<usize> {
    let n = eigenvectors.nrows();
    let mut pairs: Vec<(usize, usize, f64)> = Vec::with_capacity(n * n);
    for b in 0..n {
        for k in 0..n {
            pairs.push((b, k, eigenvectors[(b, k)].norm_sqr()));
        }
    }
    pairs.sort_by(|x, y| y.2.partial_cmp(&x.2).unwrap().then(x.0.cmp(&y.0)));
    let mut label = vec![usize::MAX; n];
    let mut used_k = vec![false; n];
    let mut used_b = vec![false; n];
    for (b, k, _) in pairs {
        if !used_b[b] && !used_k[k] {
            label[b] = k;
            used_b[b] = true;
            used_k[k] = true;
        }
    }
    label
}

// --- transmon chains ---------------------------------------------------------

/// One anharmonic node of a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub name: String,
    /// 0→1 frequency ω, rad/ns.
    pub frequency: f64,
    /// Anharmonicity α (positive for transmons), rad/ns.
    pub anharmonicity: f64,
    pub levels: usize,
}

/// Exchange coupling g(a†+a)(b†+b) between two nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    pub a: usize,
    pub b: usize,
    /// Coupling strength, rad/ns.
    pub g: f64,
}

/// Which matrix element pattern a drive couples to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriveCoupling {
    /// The bare qubit-subspace operator σ⁺ = |1⟩⟨0| (no 1→2 matrix element).
    QubitSubspace,
    /// The full charge ladder a† (⟨2|a†|1⟩ = √2 drives leakage).
    FullLadder,
}

/// A rotating drive z(t)e^{−iω_d t}·A⁺ + h.c. applied to one node, where
/// A⁺ is chosen by [`DriveCoupling`] and z is the complex envelope.
#[derive(Debug, Clone)]
pub struct Drive {
    pub node: usize,
    pub envelope: Pulse,
    pub coupling: DriveCoupling,
}

/// Simulation frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Frame {
    Lab,
    /// Frame rotating at `omega` per excitation; `rwa` drops
    /// excitation-non-conserving coupling terms.
    Rotating { omega: f64, rwa: bool },
}

/// A chain of anharmonic oscillators with pairwise exchange couplings.
#[derive(Debug, Clone)]
pub struct TransmonChain {
    pub nodes: Vec<Node>,
    pub couplings: Vec<Coupling>,
    dim: usize,
    lower: Vec<CMat>,
    sig_lower: Vec<CMat>,
    num: Vec<CMat>,
}

impl TransmonChain {
    pub fn new(nodes: Vec<Node>, couplings: Vec<Coupling>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Argument("chain needs at least one node".into()));
        }
        for n in &nodes {
            if n.levels < 3 {
                return Err(Error::Argument(format!(
                    "node `{}` has {} levels; transmon nodes need ≥ 3 so leakage is representable",
                    n.name, n.levels
                )));
            }
        }
        let dim: usize = nodes.iter().map(|n| n.levels).product();
        if dim > DIM_CAP {
            return Err(Error::Capacity { dim, cap: DIM_CAP });
        }
        for c in &couplings {
            if c.a >= nodes.len() || c.b >= nodes.len() || c.a == c.b {
                return Err(Error::Argument(format!(
                    "coupling references invalid node pair ({}, {})",
                    c.a, c.b
                )));
            }
        }
        let embed = |j: usize, local: &CMat| -> CMat {
            let mut m = operator::identity(1);
            for (k, node) in nodes.iter().enumerate() {
                let factor = if k == j {
                    local.clone()
                } else {
                    operator::identity(node.levels)
                };
                m = operator::kron(&m, &factor);
            }
            m
        };
        let mut lower = Vec::new();
        let mut sig_lower = Vec::new();
        let mut num = Vec::new();
        for (j, node) in nodes.iter().enumerate() {
            let a = operator::lowering(node.levels);
            let mut s = CMat::zeros(node.levels, node.levels);
            s[(0, 1)] = operator::ONE;
            lower.push(embed(j, &a));
            sig_lower.push(embed(j, &s));
            num.push(embed(j, &operator::number(node.levels)));
        }
        Ok(Self { nodes, couplings, dim, lower, sig_lower, num })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Total excitation-number operator Σ n̂_j.
    pub fn total_number(&self) -> CMat {
        let mut n = CMat::zeros(self.dim, self.dim);
        for nj in &self.num {
            n += nj;
        }
        n
    }

    /// Static chain Hamiltonian. With `rwa` the couplings keep only the
    /// excitation-conserving part g(a†b + ab†).
    pub fn static_hamiltonian(&self, rwa: bool) -> CMat {
        let mut h = CMat::zeros(self.dim, self.dim);
        for (j, node) in self.nodes.iter().enumerate() {
            let n = &self.num[j];
            h += n * C64::new(node.frequency, 0.0);
            // −(α/2) a†a†aa = −(α/2) n(n−1)
            let nn = n * n - n;
            h += nn * C64::new(-node.anharmonicity / 2.0, 0.0);
        }
        for c in &self.couplings {
            let (al, bl) = (&self.lower[c.a], &self.lower[c.b]);
            let exch = al.adjoint() * bl + bl.adjoint() * al;
            h += &exch * C64::new(c.g, 0.0);
            if !rwa {
                let cr = al.adjoint() * bl.adjoint() + bl * al;
                h += &cr * C64::new(c.g, 0.0);
            }
        }
        h
    }

    /// Counter-rotating coupling part Σ g(a†b† + ab), for frame-shifted use.
    fn counter_rotating(&self) -> CMat {
        let mut h = CMat::zeros(self.dim, self.dim);
        for c in &self.couplings {
            let (al, bl) = (&self.lower[c.a], &self.lower[c.b]);
            h += (al.adjoint() * bl.adjoint()) * C64::new(c.g, 0.0);
        }
        h
    }

    fn drive_op(&self, drive: &Drive) -> CMat {
        match drive.coupling {
            DriveCoupling::QubitSubspace => self.sig_lower[drive.node].adjoint(),
            DriveCoupling::FullLadder => self.lower[drive.node].adjoint(),
        }
    }

    /// Time-dependent Hamiltonian in the requested frame.
    ///
    /// The drive is the rotating form z(t)e^{−iω_d t}A⁺ + h.c. with
    /// ω_d = drive.envelope.carrier; in a rotating frame the carrier appears
    /// as the offset ω_d − ω_frame, and with `rwa` off the counter-rotating
    /// coupling terms oscillate at 2ω_frame.
    pub fn hamiltonian<'a>(
        &'a self,
        drive: Option<&'a Drive>,
        frame: Frame,
    ) -> Result<impl Fn(f64) -> CMat + 'a> {
        if let Some(d) = drive {
            if d.node >= self.nodes.len() {
                return Err(Error::Argument(format!("drive node {} does not exist", d.node)));
            }
        }
        let (w_frame, rwa) = match frame {
            Frame::Lab => (0.0, false),
            Frame::Rotating { omega, rwa } => {
                if !omega.is_finite() {
                    return Err(Error::Argument("frame frequency must be finite".into()));
                }
                (omega, rwa)
            }
        };
        let mut h_static = self.static_hamiltonian(true);
        if w_frame != 0.0 {
            h_static -= self.total_number() * C64::new(w_frame, 0.0);
        }
        let h_cr = if rwa { None } else { Some(self.counter_rotating()) };
        let drive_plus = drive.map(|d| self.drive_op(d));
        Ok(move |t: f64| {
            let mut h = h_static.clone();
            if let Some(cr) = &h_cr {
                let z = C64::from_polar(1.0, 2.0 * w_frame * t);
                h += cr * z + cr.adjoint() * z.conj();
            }
            if let (Some(d), Some(ap)) = (drive, &drive_plus) {
                let z = d.envelope.value(t);
                let carrier = C64::from_polar(1.0, -(d.envelope.carrier - w_frame) * t);
                let term = ap * (z.conj() * carrier);
                h += &term + term.adjoint();
            }
            h
        })
    }

    /// Eigen-decomposition with max-overlap dressed labels.
    pub fn dressed(&self, rwa: bool) -> DressedChain {
        let h = self.static_hamiltonian(rwa);
        let eig = h.symmetric_eigen();
        let labels = assign_labels(&eig.eigenvectors);
        DressedChain {
            energies: eig.eigenvalues.iter().copied().collect(),
            states: eig.eigenvectors,
            labels,
            dims: self.nodes.iter().map(|n| n.levels).collect(),
        }
    }

    /// Flat index of a bare occupancy vector.
    pub fn bare_index(&self, occ: &[usize]) -> Result<usize> {
        if occ.len() != self.nodes.len() {
            return Err(Error::Argument(format!(
                "occupancy has {} entries for {} nodes",
                occ.len(),
                self.nodes.len()
            )));
        }
        let mut idx = 0;
        for (o, node) in occ.iter().zip(&self.nodes) {
            if *o >= node.levels {
                return Err(Error::Argument(format!(
                    "occupancy {o} exceeds {} levels",
                    node.levels
                )));
            }
            idx = idx * node.levels + o;
        }
        Ok(idx)
    }

    /// δ = (E₁₁−E₁₀) − (E₀₁−E₀₀) conditioned on `conditioner`, acting on
    /// `target`, all other nodes in the ground state. Symmetric under
    /// swapping the two roles.
    pub fn effective_splitting(&self, target: usize, conditioner: usize, rwa: bool) -> Result<f64> {
        let d = self.dressed(rwa);
        let occ = |c: usize, t: usize| {
            let mut v = vec![0usize; self.nodes.len()];
            v[conditioner] = c;
            v[target] = t;
            v
        };
        let e00 = d.energy(self, &occ(0, 0))?;
        let e01 = d.energy(self, &occ(0, 1))?;
        let e10 = d.energy(self, &occ(1, 0))?;
        let e11 = d.energy(self, &occ(1, 1))?;
        Ok((e11 - e10) - (e01 - e00))
    }
}

/// Dressed eigen-data of a chain with bare-state labels.
#[derive(Debug, Clone)]
pub struct DressedChain {
    energies: Vec<f64>,
    states: CMat,
    labels: Vec<usize>,
    dims: Vec<usize>,
}

impl DressedChain {
    pub fn energy(&self, chain: &TransmonChain, occ: &[usize]) -> Result<f64> {
        let b = chain.bare_index(occ)?;
        Ok(self.energies[self.labels[b]])
    }

    /// Dressed state with phase fixed so its dominant bare component is
    /// real positive.
    pub fn state(&self, chain: &TransmonChain, occ: &[usize]) -> Result<nalgebra::DVector<C64>> {
        let b = chain.bare_index(occ)?;
        let k = self.labels[b];
        let mut v: nalgebra::DVector<C64> = self.states.column(k).into();
        let phase = v[b].arg();
        let corr = C64::from_polar(1.0, -phase);
        for x in v.iter_mut() {
            *x *= corr;
        }
        Ok(v)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }
}

/// The spectated-regime two-qubit model: quasi-static δ on the diagonal and
/// exchange g(t) confined to the span{|01⟩,|10⟩} block.
#[derive(Debug, Clone)]
pub struct SpectatedTwoQubit {
    /// Quasi-static error, rad/ns.
    pub delta: f64,
}

impl SpectatedTwoQubit {
    /// The 4×4 total Hamiltonian at exchange value g.
    pub fn h_total(&self, g: f64) -> CMat {
        let d = self.delta;
        let z = C64::new(0.0, 0.0);
        let c = |x: f64| C64::new(x, 0.0);
        CMat::from_row_slice(
            4,
            4,
            &[
                c(-d / 2.0), z, z, z,
                z, c(d / 2.0), c(g), z,
                z, c(g), c(-d / 2.0), z,
                z, z, z, c(d / 2.0),
            ],
        )
    }

    /// Effective two-level Hamiltonian on span{|01⟩,|10⟩}:
    /// (δ/2)σz + g(t)σx.
    pub fn block_hamiltonian(&self, g: f64) -> CMat {
        let c = |x: f64| C64::new(x, 0.0);
        CMat::from_row_slice(2, 2, &[c(self.delta / 2.0), c(g), c(g), c(-self.delta / 2.0)])
    }
}

// --- JSON schema --------------------------------------------------------------

pub const DEVICE_SCHEMA_VERSION: u32 = 1;

/// On-disk device description; external units are ordinary frequencies
/// (GHz for node frequencies, MHz for anharmonicities and couplings), the
/// ×2π is applied on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeviceDoc {
    pub schema_version: u32,
    pub nodes: Vec<NodeDoc>,
    pub couplings: Vec<CouplingDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeDoc {
    pub name: String,
    pub frequency_ghz: f64,
    pub anharmonicity_mhz: f64,
    pub levels: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CouplingDoc {
    pub a: String,
    pub b: String,
    pub g_mhz: f64,
}

impl TransmonChain {
    pub fn to_doc(&self) -> DeviceDoc {
        DeviceDoc {
            schema_version: DEVICE_SCHEMA_VERSION,
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeDoc {
                    name: n.name.clone(),
                    frequency_ghz: n.frequency / units::GHZ,
                    anharmonicity_mhz: units::to_mhz(n.anharmonicity),
                    levels: n.levels,
                })
                .collect(),
            couplings: self
                .couplings
                .iter()
                .map(|c| CouplingDoc {
                    a: self.nodes[c.a].name.clone(),
                    b: self.nodes[c.b].name.clone(),
                    g_mhz: units::to_mhz(c.g),
                })
                .collect(),
        }
    }

    pub fn from_doc(doc: &DeviceDoc) -> Result<Self> {
        if doc.schema_version != DEVICE_SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "device schema_version {} unsupported (expected {DEVICE_SCHEMA_VERSION})",
                doc.schema_version
            )));
        }
        let nodes: Vec<Node> = doc
            .nodes
            .iter()
            .map(|n| Node {
                name: n.name.clone(),
                frequency: units::ghz(n.frequency_ghz),
                anharmonicity: units::mhz(n.anharmonicity_mhz),
                levels: n.levels,
            })
            .collect();
        let index_of = |name: &str| -> Result<usize> {
            nodes
                .iter()
                .position(|n| n.name == name)
                .ok_or_else(|| Error::Schema(format!("coupling references unknown node `{name}`")))
        };
        let couplings = doc
            .couplings
            .iter()
            .map(|c| {
                Ok(Coupling {
                    a: index_of(&c.a)?,
                    b: index_of(&c.b)?,
                    g: units::mhz(c.g_mhz),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        TransmonChain::new(nodes, couplings)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_doc())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: DeviceDoc =
            serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        Self::from_doc(&doc)
    }
}

// --- fixtures -----------------------------------------------------------------

/// Transmon–coupler–transmon chain used by the regression fixtures:
/// ω = {5.7735, 5.4735, 6.99} GHz, α₁ = α₂ = 249 MHz, g = 151 MHz, three
/// levels per node. The coupler anharmonicity (not fixed by the device
/// description) is 274.75 MHz, placing the coupler↔q2 conditional splitting
/// at −10.94 MHz×2π.
pub fn coupler_chain() -> TransmonChain {
    TransmonChain::new(
        vec![
            Node {
                name: "q1".into(),
                frequency: units::ghz(5.7735),
                anharmonicity: units::mhz(249.0),
                levels: 3,
            },
            Node {
                name: "c".into(),
                frequency: units::ghz(6.99),
                anharmonicity: units::mhz(274.75),
                levels: 3,
            },
            Node {
                name: "q2".into(),
                frequency: units::ghz(5.4735),
                anharmonicity: units::mhz(249.0),
                levels: 3,
            },
        ],
        vec![
            Coupling { a: 1, b: 0, g: units::mhz(151.0) },
            Coupling { a: 1, b: 2, g: units::mhz(151.0) },
        ],
    )
    .expect("fixture chain is valid")
}

/// Node indices of [`coupler_chain`]: (target q2, intruder = coupler).
pub const COUPLER_CHAIN_TARGET: usize = 2;
pub const COUPLER_CHAIN_INTRUDER: usize = 1;

/// Four-level transmon pair (spectator 5.0 GHz / α 230 MHz, target 5.5 GHz /
/// α 260 MHz) with exchange coupling `g_mhz`.
pub fn transmon_pair(g_mhz: f64) -> TransmonChain {
    TransmonChain::new(
        vec![
            Node {
                name: "s".into(),
                frequency: units::ghz(5.0),
                anharmonicity: units::mhz(230.0),
                levels: 4,
            },
            Node {
                name: "t".into(),
                frequency: units::ghz(5.5),
                anharmonicity: units::mhz(260.0),
                levels: 4,
            },
        ],
        vec![Coupling { a: 0, b: 1, g: units::mhz(g_mhz) }],
    )
    .expect("fixture pair is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{max_abs_diff, propagate_final, TimeGrid};
    use crate::units::{ghz, mhz};
    use approx::assert_abs_diff_eq;

    #[test]
    fn dressed_basis_diagonalizes() {
        let pair = BipartitePair::new(ghz(6.0), ghz(5.0), mhz(120.0));
        let db = pair.dressed_basis().unwrap();
        let h = pair.hamiltonian();
        let back = db.transform.adjoint() * h * &db.transform;
        assert!(max_abs_diff(&back, &db.h_diag) < 1e-10);
        assert!(operator::unitarity_defect(&db.transform) < 1e-12);
    }

    #[test]
    fn dressed_ladder_decoupled_limit() {
        // g = 0 → bare σ_t⁺ pattern (entries ±1 by the eigenvector sign
        // convention), and zero splitting.
        let pair = BipartitePair::new(ghz(6.0), ghz(5.0), 0.0);
        let db = pair.dressed_basis().unwrap();
        assert_abs_diff_eq!(db.ladder[(1, 0)].re, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(db.ladder[(3, 2)].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(db.ladder[(2, 0)].norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(db.ladder[(3, 1)].norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pair.effective_splitting(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn dressed_ladder_weak_coupling_limit() {
        // g ≪ Δ: off-block entries → 0, diagonal-block dipoles → 1
        let pair = BipartitePair::new(ghz(6.0), ghz(5.0), mhz(5.0));
        let db = pair.dressed_basis().unwrap();
        assert!(db.ladder[(2, 0)].norm() < 0.01);
        assert!(db.ladder[(3, 1)].norm() < 0.01);
        assert!((db.ladder[(1, 0)].norm() - 1.0).abs() < 1e-4);
        assert!((db.ladder[(3, 2)].norm() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn dressed_ladder_resonant_limit() {
        // Δ = 0: all four entries magnitude 1/√2
        let pair = BipartitePair::new(ghz(5.0), ghz(5.0), mhz(80.0));
        let db = pair.dressed_basis().unwrap();
        let r = 1.0 / 2f64.sqrt();
        for (i, j) in [(1usize, 0usize), (2, 0), (3, 1), (3, 2)] {
            assert_abs_diff_eq!(db.ladder[(i, j)].norm(), r, epsilon = 1e-9);
        }
    }

    #[test]
    fn eq2_entry_identities() {
        for (wi, wt, g) in [
            (6.0, 5.0, 0.2),
            (5.3, 5.0, 0.05),
            (7.0, 5.0, 0.4),
            (5.0, 5.5, 0.15),
        ] {
            let pair = BipartitePair::new(ghz(wi), ghz(wt), ghz(g));
            let d = pair.detuning();
            let e = pair.epsilon();
            let (up, um) = pair.upsilon();
            let a = ((d + e) / up).powi(2) + (2.0 * pair.g / up).powi(2);
            let b = ((-d + e) / um).powi(2) + (2.0 * pair.g / um).powi(2);
            assert_abs_diff_eq!(a, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(b, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn degenerate_pair_rejected() {
        let pair = BipartitePair::new(ghz(5.0), ghz(5.0), 0.0);
        assert!(pair.dressed_basis().is_err());
    }

    #[test]
    fn tls_pair_splitting_is_zero_and_lamb_shift_perturbative() {
        // For a two-level σxσx pair the conditional splitting vanishes
        // identically; the common transition shift is g²(1/Σ − 1/Δ) + O(g⁴).
        let (wi, wt) = (ghz(6.0), ghz(5.0));
        let g = mhz(25.0); // g/Δ = 0.025
        let pair = BipartitePair::new(wi, wt, g);
        assert!(pair.effective_splitting().abs() < 1e-10);
        let h = pair.hamiltonian();
        let eig = h.symmetric_eigen();
        let labels = assign_labels(&eig.eigenvectors);
        let e = |b: usize| eig.eigenvalues[labels[b]];
        let shift = (e(1) - e(0)) - wt;
        let sigma = wi + wt;
        let delta = wi - wt;
        let pert = g * g * (1.0 / sigma - 1.0 / delta);
        let g4 = g.powi(4) / delta.powi(3);
        assert!(
            (shift - pert).abs() < 20.0 * g4,
            "shift {shift:.3e} vs perturbative {pert:.3e} (O(g⁴) = {g4:.1e})"
        );
    }

    #[test]
    fn splitting_symmetric_under_role_swap() {
        let chain = coupler_chain();
        let a = chain.effective_splitting(2, 1, true).unwrap();
        let b = chain.effective_splitting(1, 2, true).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-10);
    }

    #[test]
    fn coupler_chain_splitting_fixture() {
        let chain = coupler_chain();
        let delta = chain
            .effective_splitting(COUPLER_CHAIN_TARGET, COUPLER_CHAIN_INTRUDER, true)
            .unwrap();
        // fixture pins the coupler↔q2 splitting at −10.94 MHz×2π
        assert_abs_diff_eq!(units::to_mhz(delta), -10.94, epsilon = 0.03);
    }

    #[test]
    fn uncoupled_chain_is_diagonal_ladders() {
        let chain = TransmonChain::new(
            vec![
                Node { name: "a".into(), frequency: ghz(5.0), anharmonicity: mhz(200.0), levels: 3 },
                Node { name: "b".into(), frequency: ghz(6.0), anharmonicity: mhz(300.0), levels: 3 },
            ],
            vec![],
        )
        .unwrap();
        let h = chain.static_hamiltonian(false);
        for i in 0..9 {
            for j in 0..9 {
                if i != j {
                    assert_abs_diff_eq!(h[(i, j)].norm(), 0.0, epsilon = 1e-15);
                }
            }
        }
        // E(n) = ωn − (α/2)n(n−1) per node
        let e2 = 2.0 * ghz(5.0) - mhz(200.0);
        assert_abs_diff_eq!(h[(6, 6)].re, e2, epsilon = 1e-9); // |2,0⟩ at index 2*3+0
    }

    #[test]
    fn chain_dimension_fixture() {
        assert_eq!(coupler_chain().dim(), 27);
        assert_eq!(transmon_pair(58.0).dim(), 16);
    }

    #[test]
    fn dimension_cap_enforced() {
        let nodes = (0..4)
            .map(|k| Node {
                name: format!("n{k}"),
                frequency: ghz(5.0),
                anharmonicity: mhz(200.0),
                levels: 4,
            })
            .collect();
        match TransmonChain::new(nodes, vec![]) {
            Err(Error::Capacity { dim, cap }) => {
                assert_eq!(dim, 256);
                assert_eq!(cap, 64);
            }
            other => panic!("expected capacity error, got {other:?}"),
        }
    }

    #[test]
    fn device_json_round_trip() {
        let chain = coupler_chain();
        let text = chain.to_json().unwrap();
        let back = TransmonChain::from_json(&text).unwrap();
        assert_eq!(back.nodes.len(), 3);
        assert_abs_diff_eq!(back.nodes[1].anharmonicity, mhz(274.75), epsilon = 1e-12);
        assert_abs_diff_eq!(back.couplings[0].g, mhz(151.0), epsilon = 1e-12);
    }

    #[test]
    fn rotating_frame_matches_lab_frame_populations() {
        // RWA off in both frames: propagate a short drive on the pair and
        // compare final dressed-state populations.
        let chain = transmon_pair(30.0);
        let dressed = chain.dressed(false);
        let wd = dressed.energy(&chain, &[0, 1]).unwrap() - dressed.energy(&chain, &[0, 0]).unwrap();
        let t_gate = 8.0;
        let envelope = crate::pulse::cosine_pulse(std::f64::consts::PI / 6.0, t_gate, wd);
        let drive = Drive { node: 1, envelope, coupling: DriveCoupling::FullLadder };

        let h_lab = chain.hamiltonian(Some(&drive), Frame::Lab).unwrap();
        let grid = TimeGrid::from_duration(t_gate, 60_000).unwrap();
        let u_lab = propagate_final(h_lab, &grid).unwrap();

        let h_rot = chain
            .hamiltonian(Some(&drive), Frame::Rotating { omega: wd, rwa: false })
            .unwrap();
        let u_rot = propagate_final(h_rot, &grid).unwrap();

        let psi0 = dressed.state(&chain, &[0, 0]).unwrap();
        let lab_final = &u_lab * &psi0;
        let rot_final = &u_rot * &psi0;
        for k in 0..chain.dim() {
            let p_lab = lab_final[k].norm_sqr();
            let p_rot = rot_final[k].norm_sqr();
            // populations agree frame-independently (frame op is diagonal in
            // number basis, but eigenstates mix bare levels, so compare bare
            // populations which the frame rotates only by phases)
            assert!(
                (p_lab - p_rot).abs() < 1e-6,
                "bare population {k}: lab {p_lab:.8} vs rot {p_rot:.8}"
            );
        }
    }
}
