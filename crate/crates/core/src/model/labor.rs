//! Skill-based hiring and firing.
//!
//! A firm whose desired labor exceeds what its employees supply posts hire
//! requests to every unemployed household whose skill at that firm reaches the
//! hiring threshold. Each such household accepts the requesting firm at which
//! its own skill is highest. A firm that needs less labor lays off its
//! lowest-skill employees but always keeps at least one.

use std::cmp::Ordering;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaborDecision {
    /// Post hire requests for this many additional employees.
    Hire(usize),
    /// Lay off this many employees.
    Fire(usize),
    Hold,
}

/// Compare desired hours against the hours current employees supply.
/// Headcounts round up: one hour short of capacity asks for one more hire.
pub fn labor_decision(desired_hours: f64, headcount: usize, labor_hours: f64) -> LaborDecision {
    let current = labor_hours * headcount as f64;
    if desired_hours > current {
        let need = ((desired_hours - current) / labor_hours).ceil();
        let need = if need.is_finite() && need < usize::MAX as f64 { need as usize } else { usize::MAX };
        LaborDecision::Hire(need.max(1))
    } else if desired_hours < current {
        let target = ((desired_hours / labor_hours).ceil() as usize).max(1);
        if headcount > target {
            LaborDecision::Fire(headcount - target)
        } else {
            LaborDecision::Hold
        }
    } else {
        LaborDecision::Hold
    }
}

fn by_skill_desc(a: &(u32, f64), b: &(u32, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then(a.0.cmp(&b.0))
}

/// Employees to lay off: the `count` lowest skills, keeping lower household
/// ids on ties.
pub fn select_layoffs(employees: &[(u32, f64)], count: usize) -> Vec<u32> {
    let mut ranked = employees.to_vec();
    ranked.sort_by(by_skill_desc);
    let keep = ranked.len().saturating_sub(count).max(1);
    let mut out: Vec<u32> = ranked[keep.min(ranked.len())..].iter().map(|e| e.0).collect();
    out.sort_unstable();
    out
}

/// The requesting firm where the household's own skill is highest, lower
/// firm id on ties.
pub fn choose_employer(offers: &[(u32, f64)]) -> Option<u32> {
    offers.iter().copied().min_by(by_skill_desc).map(|o| o.0)
}

/// Applicants a firm takes on when more qualified households choose it than
/// it needs: the top `need` by skill, lower household id on ties.
pub fn accept_applicants(applicants: &[(u32, f64)], need: usize) -> Vec<u32> {
    let mut ranked = applicants.to_vec();
    ranked.sort_by(by_skill_desc);
    ranked.truncate(need);
    let mut out: Vec<u32> = ranked.into_iter().map(|a| a.0).collect();
    out.sort_unstable();
    out
}

/// One complete matching round over all firms.
///
/// `employment[i]` is household `i`'s employer, `skills[i][j]` its skill at
/// firm `j`. Layoffs happen first, so a household laid off by one firm can be
/// hired by another in the same round.
pub fn match_labor(
    desired_hours: &[f64],
    employment: &[Option<usize>],
    skills: &[Vec<f64>],
    min_skill: f64,
    labor_hours: f64,
) -> Vec<Option<usize>> {
    let firms = desired_hours.len();
    let mut next = employment.to_vec();
    let headcount = |emp: &[Option<usize>], j: usize| emp.iter().filter(|e| **e == Some(j)).count();

    let decisions: Vec<LaborDecision> =
        (0..firms).map(|j| labor_decision(desired_hours[j], headcount(employment, j), labor_hours)).collect();

    for (j, decision) in decisions.iter().enumerate() {
        if let LaborDecision::Fire(count) = *decision {
            let staff: Vec<(u32, f64)> = employment
                .iter()
                .enumerate()
                .filter(|(_, e)| **e == Some(j))
                .map(|(i, _)| (i as u32, skills[i][j]))
                .collect();
            for i in select_layoffs(&staff, count) {
                next[i as usize] = None;
            }
        }
    }

    let mut applicants: Vec<Vec<(u32, f64)>> = vec![Vec::new(); firms];
    for i in 0..next.len() {
        if next[i].is_some() {
            continue;
        }
        let offers: Vec<(u32, f64)> = decisions
            .iter()
            .enumerate()
            .filter(|(j, d)| matches!(d, LaborDecision::Hire(_)) && skills[i][*j] >= min_skill)
            .map(|(j, _)| (j as u32, skills[i][j]))
            .collect();
        if let Some(j) = choose_employer(&offers) {
            applicants[j as usize].push((i as u32, skills[i][j as usize]));
        }
    }
    for (j, decision) in decisions.iter().enumerate() {
        if let LaborDecision::Hire(need) = *decision {
            for i in accept_applicants(&applicants[j], need) {
                next[i as usize] = Some(j);
            }
        }
    }
    next
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decisions() {
        assert_eq!(labor_decision(960.0, 2, 480.0), LaborDecision::Hold);
        assert_eq!(labor_decision(961.0, 2, 480.0), LaborDecision::Hire(1));
        assert_eq!(labor_decision(2000.0, 2, 480.0), LaborDecision::Hire(3));
        assert_eq!(labor_decision(0.0, 3, 480.0), LaborDecision::Fire(2));
        assert_eq!(labor_decision(500.0, 2, 480.0), LaborDecision::Hold);
        assert_eq!(labor_decision(0.0, 1, 480.0), LaborDecision::Hold);
        assert_eq!(labor_decision(f64::INFINITY, 1, 480.0), LaborDecision::Hire(usize::MAX));
    }

    #[test]
    fn status_quo_when_on_target() {
        let skills = vec![vec![1.1, 0.8], vec![0.9, 1.3], vec![1.0, 1.0]];
        let employment = vec![Some(0), Some(1), Some(1)];
        assert_eq!(match_labor(&[480.0, 960.0], &employment, &skills, 1.0, 480.0), employment);
    }

    #[test]
    fn threshold_filters_requests() {
        let skills = vec![vec![1.2, 0.9], vec![1.0, 1.0], vec![1.0, 1.0]];
        let employment = vec![None, Some(0), Some(1)];
        let next = match_labor(&[5000.0, 5000.0], &employment, &skills, 1.0, 480.0);
        assert_eq!(next[0], Some(0));
    }

    #[test]
    fn best_skill_firm_wins() {
        let skills = vec![vec![1.1, 1.4], vec![1.0, 1.0], vec![1.0, 1.0]];
        let employment = vec![None, Some(0), Some(1)];
        let next = match_labor(&[5000.0, 5000.0], &employment, &skills, 1.0, 480.0);
        assert_eq!(next[0], Some(1));
    }

    #[test]
    fn layoffs_keep_one_employee() {
        let skills = vec![vec![0.7], vec![1.5], vec![1.1]];
        let employment = vec![Some(0); 3];
        let next = match_labor(&[0.0], &employment, &skills, 1.0, 480.0);
        assert_eq!(next, vec![None, Some(0), None]);
    }

    #[test]
    fn oversubscription_takes_top_skills() {
        let skills = vec![vec![1.0], vec![1.3], vec![1.2], vec![1.3], vec![2.0]];
        let employment = vec![None, None, None, None, Some(0)];
        let next = match_labor(&[480.0 * 2.5], &employment, &skills, 1.0, 480.0);
        assert_eq!(next, vec![None, Some(0), None, Some(0), Some(0)]);
    }

    #[test]
    fn laid_off_household_can_move() {
        let skills = vec![vec![0.9, 1.2], vec![1.4, 1.0], vec![1.0, 1.0]];
        let employment = vec![Some(0), Some(0), Some(1)];
        let next = match_labor(&[10.0, 2000.0], &employment, &skills, 1.0, 480.0);
        assert_eq!(next, vec![Some(1), Some(0), Some(1)]);
    }
}
